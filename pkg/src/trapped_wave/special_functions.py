"""Complex-argument Bessel and Hankel functions of integer and half-integer order.

Values are produced by order recurrences seeded with the two lowest orders:

* ``H^{(1)}`` is run upward through the ratio ``H_{n+1}/H_n`` (the dominant
  direction once the order exceeds ``|z|``),
* the ratio ``J_{n+1}/J_n`` is run downward from well above ``max(n, |z|)``
  (Miller's direction for the minimal solution),
* ``J_n`` itself is then recovered from the cross-product identity
  ``J_{n+1} H_n - J_n H_{n+1} = 2i / (pi z)``.

Everything is carried as complex logarithms, so the ladders stay finite where
``J`` underflows and ``H`` overflows (large order, small argument).  The modal
solvers consume the ladders directly; the scalar wrappers below exponentiate.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .errors import SingularityError

__all__ = [
    "airy_neg_zeros",
    "cyl_bessel_j",
    "cyl_hankel1",
    "log_cyl_ladder",
    "log_sph_ladder",
    "sph_bessel",
    "sph_hankel1",
]

_LOG_MAX = 709.0


def _check_order(nu):
    nu = float(nu)
    if nu < 0 or abs(2 * nu - round(2 * nu)) > 1e-12:
        raise ValueError(f"order must be a non-negative integer or half-integer, got {nu}")
    return nu


def _log_hankel_seed(nu0, z):
    """log H_{nu0}(z) and log H_{nu0+1}(z) from the exponentially scaled routine."""
    h0 = special.hankel1e(nu0, z)
    h1 = special.hankel1e(nu0 + 1.0, z)
    return np.log(h0) + 1j * z, np.log(h1) + 1j * z


def _top_order(nmax, zabs):
    return int(max(nmax, zabs) + 40 + 6.0 * zabs ** (1.0 / 3.0))


def _log_hankel_ladder(nu0, nmax, z):
    logh = np.empty((nmax + 2,) + z.shape, dtype=complex)
    logh[0], logh[1] = _log_hankel_seed(nu0, z)
    ratio = np.exp(logh[1] - logh[0])
    for n in range(1, nmax + 1):
        ratio = 2.0 * (nu0 + n) / z - 1.0 / ratio
        logh[n + 1] = logh[n] + np.log(ratio)
    return logh


def _log_bessel_ladder(nu0, nmax, z, logh):
    top = _top_order(nmax, float(np.max(np.abs(z))) if z.size else 0.0)
    rho = np.zeros(z.shape, dtype=complex)
    rhos = np.empty((nmax + 1,) + z.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(top, 0, -1):
            rho = 1.0 / (2.0 * (nu0 + n) / z - rho)
            if n - 1 <= nmax:
                rhos[n - 1] = rho
        # rhos[n] = J_{n+1}/J_n
        hratio = np.exp(logh[1:] - logh[:-1])
        return _exact_zeros(np.log(2j / (np.pi * z)) - logh[:-1] - np.log(rhos - hratio))


def _exact_zeros(logv):
    # an argument sitting on a zero of J makes the ratio infinite; keep log J = -inf
    bad = ~np.isfinite(logv)
    if np.any(bad):
        logv = np.where(bad, complex(-np.inf, 0.0), logv)
    return logv


def log_cyl_ladder(nu0, nmax, z):
    """Logarithms of ``J_{nu0+n}(z)`` and ``H^{(1)}_{nu0+n}(z)`` for ``n = 0..nmax``.

    Parameters
    ----------
    nu0 : float
        Base order, 0 or 1/2.
    nmax : int
        Highest ladder index.
    z : array_like of complex
        Nonzero arguments of any shape.

    Returns
    -------
    logj, logh : ndarray, shape ``(nmax + 1,) + z.shape``
        Complex logarithms (imaginary parts are not reduced to a branch).
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SingularityError("ladder evaluation requires z != 0")
    logh = _log_hankel_ladder(nu0, nmax, z)
    # J is evaluated in the closed upper half-plane and reflected; below the
    # axis the cross-product formula cancels like exp(-2|Im z|).
    lower = z.imag < 0
    zu = np.where(lower, np.conj(z), z)
    loghu = logh
    if np.any(lower):
        loghu = logh.copy()
        loghu[:, lower] = _log_hankel_ladder(nu0, nmax, zu[lower])
    logj = _log_bessel_ladder(nu0, nmax, zu, loghu)
    logj = np.where(lower, np.conj(logj), logj)
    return logj, logh[:-1]


def log_cyl_pair(nu0, n, z):
    """Logarithms of ``J`` and ``H^{(1)}`` at orders ``nu0+n`` and ``nu0+n+1`` only.

    Same recurrences as :func:`log_cyl_ladder` without storing the ladder;
    returns ``(logj, logh)`` each of shape ``(2,) + z.shape``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SingularityError("ladder evaluation requires z != 0")
    lower = z.imag < 0
    zu = np.where(lower, np.conj(z), z)
    lh_u = _log_hankel_pair(nu0, n, zu)
    if np.any(lower):
        lh = _log_hankel_pair(nu0, n, z)
    else:
        lh = lh_u
    # downward ratio J_{m+1}/J_m, kept at m = n and m = n + 1
    top = _top_order(n + 1, float(np.max(np.abs(zu))) if zu.size else 0.0)
    rho = np.zeros(zu.shape, dtype=complex)
    keep = np.empty((2,) + zu.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for m in range(top, n, -1):
            rho = 1.0 / (2.0 * (nu0 + m) / zu - rho)
            if m - 1 == n + 1:
                keep[1] = rho
        keep[0] = rho
        hr0 = np.exp(lh_u[1] - lh_u[0])
        hr1 = 2.0 * (nu0 + n + 1) / zu - 1.0 / hr0
        cross = np.log(2j / (np.pi * zu))
        lj = np.empty((2,) + zu.shape, dtype=complex)
        lj[0] = cross - lh_u[0] - np.log(keep[0] - hr0)
        lj[1] = cross - lh_u[1] - np.log(keep[1] - hr1)
    lj = _exact_zeros(np.where(lower, np.conj(lj), lj))
    return lj, lh


def _log_hankel_pair(nu0, n, z):
    l0, l1 = _log_hankel_seed(nu0, z)
    if n == 0:
        return np.stack([l0, l1])
    ratio = np.exp(l1 - l0)
    acc = l0
    prod = np.ones(z.shape, dtype=complex)
    for m in range(1, n + 1):
        prod = prod * ratio
        ratio = 2.0 * (nu0 + m) / z - 1.0 / ratio
        if m % 12 == 0:
            acc = acc + np.log(prod)
            prod = np.ones(z.shape, dtype=complex)
    acc = acc + np.log(prod)
    return np.stack([acc, acc + np.log(ratio)])


def log_sph_pair(n, z):
    """Logarithms of ``j_l, h_l`` at ``l = n, n + 1``."""
    z = np.asarray(z, dtype=complex)
    logj, logh = log_cyl_pair(0.5, n, z)
    scale = 0.5 * np.log(np.pi / (2.0 * z))
    return logj + scale, logh + scale


def log_sph_ladder(nmax, z):
    """Logarithms of ``j_l(z)`` and ``h^{(1)}_l(z)`` for ``l = 0..nmax``."""
    z = np.asarray(z, dtype=complex)
    logj, logh = log_cyl_ladder(0.5, nmax, z)
    scale = 0.5 * np.log(np.pi / (2.0 * z))
    return logj + scale, logh + scale


def _finite_exp(logv, what):
    if np.any(np.real(logv) > _LOG_MAX):
        raise OverflowError(f"{what} overflows double precision at this argument")
    return np.exp(logv)


def _ladder_values(nu, z, kind, spherical):
    nu = _check_order(nu)
    z = np.asarray(z, dtype=complex)
    base = 0.5 if (nu % 1.0) else 0.0
    if spherical:
        base = 0.0
        n = int(round(nu))
    else:
        n = int(round(nu - base))
    out = np.empty(z.shape, dtype=complex)
    out_d = np.empty(z.shape, dtype=complex)
    zero = z == 0
    if np.any(zero):
        if kind == "h":
            raise SingularityError("Hankel functions are singular at z = 0")
        order_zero = (nu == 0)
        out[zero] = 1.0 if order_zero else 0.0
        if spherical:
            out_d[zero] = 1.0 / 3.0 if n == 1 else 0.0
        else:
            out_d[zero] = 0.5 if nu == 1 else (np.inf if 0 < nu < 1 else 0.0)
    nz = ~zero
    if np.any(nz):
        zz = z[nz]
        if spherical:
            lj, lh = log_sph_ladder(n + 1, zz)
        else:
            lj, lh = log_cyl_ladder(base, n + 1, zz)
        lv = lj if kind == "j" else lh
        name = "Bessel J" if kind == "j" else "Hankel H1"
        v0 = _finite_exp(lv[n], name)
        v1 = _finite_exp(lv[n + 1], name)
        out[nz] = v0
        out_d[nz] = (nu / zz) * v0 - v1
    return out, out_d


def _scalarize(a, z):
    return a[()] if np.ndim(z) == 0 else a


def cyl_bessel_j(nu, z, derivative=False):
    """Bessel function of the first kind ``J_nu(z)`` (or its z-derivative)."""
    v, d = _ladder_values(nu, z, "j", spherical=False)
    return _scalarize(d if derivative else v, z)


def cyl_hankel1(nu, z, derivative=False):
    """Hankel function of the first kind ``H^{(1)}_nu(z)`` (or its derivative)."""
    v, d = _ladder_values(nu, z, "h", spherical=False)
    return _scalarize(d if derivative else v, z)


def sph_bessel(ell, z, derivative=False):
    """Spherical Bessel function ``j_l(z)`` (or its derivative), integer ``l``."""
    if float(ell) != int(ell):
        raise ValueError("spherical order must be an integer")
    v, d = _ladder_values(int(ell), z, "j", spherical=True)
    return _scalarize(d if derivative else v, z)


def sph_hankel1(ell, z, derivative=False):
    """Spherical Hankel function ``h^{(1)}_l(z)`` (or its derivative)."""
    if float(ell) != int(ell):
        raise ValueError("spherical order must be an integer")
    v, d = _ladder_values(int(ell), z, "h", spherical=True)
    return _scalarize(d if derivative else v, z)


def airy_neg_zeros(count):
    """Positive numbers ``a_1 < a_2 < ...`` with ``Ai(-a_i) = 0``."""
    count = int(count)
    if not 1 <= count <= 50:
        raise ValueError("count must lie in 1..50")
    a = special.ai_zeros(count)[0]
    return [float(-x) for x in a]
