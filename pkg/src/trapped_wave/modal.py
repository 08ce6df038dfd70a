"""Per-mode radial Helmholtz problems: determinants, Green kernels, resolvent norms.

The cut-off resolvent of a radial scatterer splits into angular modes.  For
mode ``l`` the weighted radial operator

    P_l u = (w r^{d-1})^{-1} [ -(s r^{d-1} u')' + s l(l+d-2) r^{d-3} u ]

(``s = 1/alpha, w = 1/(c^2 alpha)`` inside a penetrable ball, ``s = w = 1``
outside) has the outgoing Green kernel ``p(r_<) q(r_>) / C`` where ``p`` is
the regular solution, ``q`` the outgoing one and ``C = s r^{d-1}(p'q - pq')``.

Sampling that kernel on a radial grid with trapezoid weights gives a
semiseparable matrix whose inverse is tridiagonal.  We assemble the
tridiagonal inverse directly from log-scaled values of ``p`` and ``q``: it is
the exact three-point scheme of the radial ODE, so its poles are exactly the
zeros of the modal determinant and the only discretization error is the
quadrature of the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, lapack

from . import special_functions as sf
from .errors import NotApplicableError, NumericalFailure, SingularityError, TruncationError
from .scatterers import Kind, ScattererSpec

__all__ = [
    "RadialGrid",
    "ResolventEstimate",
    "apply_resolvent",
    "default_l_max",
    "determinant_and_derivative",
    "log_modal_determinant",
    "modal_determinant",
    "modal_norms",
    "radial_grid",
    "resolvent_norm",
]


# ---------------------------------------------------------------------------
# log-domain helpers


def _lse(x1, x2, sign=1.0):
    """log(exp(x1) + sign*exp(x2)) for complex logarithms, elementwise."""
    x1 = np.asarray(x1, dtype=complex)
    x2 = np.asarray(x2, dtype=complex)
    m = np.maximum(x1.real, x2.real)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        s = np.exp(x1 - m) + sign * np.exp(x2 - m)
        return m + np.log(s)


def _ladder(dim, lmax, z):
    """log j_l, log h_l for l = 0..lmax+1 (spherical in 3-d, cylindrical in 2-d)."""
    if dim == 3:
        return sf.log_sph_ladder(lmax + 1, z)
    return sf.log_cyl_ladder(0.0, lmax + 1, z)


def _pair(dim, ell, z):
    """log j, log h at orders ell and ell+1 only, each of shape (2,) + z.shape."""
    if dim == 3:
        return sf.log_sph_pair(ell, z)
    return sf.log_cyl_pair(0.0, ell, z)


def _log_wronskian(dim, z):
    """log of j h' - j' h, derivative with respect to the argument."""
    z = np.asarray(z, dtype=complex)
    if dim == 3:
        return np.log(1j) - 2.0 * np.log(z)
    return np.log(2j / np.pi) - np.log(z)


def _scaled_pair(lj, ell, z, dim):
    """(s, f, f', f'') with value = e^s f, derivatives in the same scale.

    ``lj`` holds the logs at orders ``ell, ell + 1`` (as from :func:`_pair`).
    """
    lam = ell * (ell + dim - 2)
    l0, l1 = lj[0], lj[1]
    s = np.maximum(l0.real, l1.real)
    s = np.where(np.isfinite(s), s, 0.0)
    with np.errstate(under="ignore"):
        f = np.exp(l0 - s)
        f1 = np.exp(l1 - s)
    fp = (ell / z) * f - f1
    fpp = -((dim - 1) / z) * fp - (1.0 - lam / z**2) * f
    return s, f, fp, fpp


# ---------------------------------------------------------------------------
# modal determinant


def determinant_and_derivative(spec: ScattererSpec, ell: int, k):
    """Modal determinant in scaled form.

    Returns ``(log_scale, d, dprime)`` with ``D_l(k) = exp(log_scale) * d`` and
    ``D_l'(k) = exp(log_scale) * dprime``.  The Newton step ``d / dprime`` and
    the phase of ``D`` never require the unscaled value.
    """
    if ell < 0:
        raise ValueError("ell must be non-negative")
    k = np.asarray(k, dtype=complex)
    if np.any(k == 0):
        raise SingularityError("modal determinant is singular at k = 0")
    dim = spec.dimension
    a = spec.reference_radius
    zo = k * a
    ljo, lho = _pair(dim, ell, zo)
    sh, h, hp, hpp = _scaled_pair(lho, ell, zo, dim)
    if spec.kind is Kind.DIRICHLET:
        return sh, h, a * hp
    if spec.kind is Kind.NEUMANN:
        return sh, hp, a * hpp
    if spec.kind is Kind.FREE:
        c, alpha = 1.0, 1.0
    else:
        c, alpha = spec.contrast, spec.alpha
    zi = zo / c
    lji, _ = _pair(dim, ell, zi)
    sj, j, jp, jpp = _scaled_pair(lji, ell, zi, dim)
    d = (k / c) * jp * h - alpha * k * j * hp
    dp = ((1.0 / c) * jp * h + (k * a / c**2) * jpp * h + (k * a / c) * jp * hp
          - alpha * j * hp - alpha * k * (a / c) * jp * hp - alpha * k * a * j * hpp)
    return sh + sj, d, dp


def log_modal_determinant(spec, ell, k):
    """Complex logarithm of the modal determinant (branch unspecified)."""
    s, d, _ = determinant_and_derivative(spec, ell, k)
    with np.errstate(divide="ignore"):
        return s + np.log(d)


def modal_determinant(spec, ell, k):
    """Modal determinant ``D_l(k)`` whose zeros are the resonances of mode ``l``.

    3-d penetrable: ``(k/c) j_l'(ka/c) h_l(ka) - alpha k j_l(ka/c) h_l'(ka)``;
    free space uses ``c = alpha = 1`` at unit radius; Dirichlet ``h_l(ka)``;
    Neumann ``h_l'(ka)``.  Cylindrical functions replace spherical ones in 2-d.
    """
    s, d, _ = determinant_and_derivative(spec, ell, k)
    out = np.exp(s) * d
    return out[()] if np.ndim(k) == 0 else out


# ---------------------------------------------------------------------------
# radial grid


@dataclass(frozen=True)
class RadialGrid:
    """Quadrature nodes on the cut-off region with measure-weighted trapezoid weights."""

    r: np.ndarray
    weights: np.ndarray
    inside: np.ndarray  # node lies in r < a (interior medium)
    interface_index: int | None
    r_chi: float

    @property
    def n(self):
        return self.r.size


def _piece(lo, hi, n):
    return np.linspace(lo, hi, n + 1)


def radial_grid(spec, k, r_chi, points_per_wavelength=20, n_points=None, min_intervals=48):
    """Radial grid on the cut-off support ``r <= r_chi``.

    Uniform on each homogeneous piece with a node exactly at the interface.
    ``n_points`` (total nodes) overrides the points-per-wavelength rule but
    must still give at least 16 points per local wavelength.
    """
    a = spec.radius
    if spec.kind is not Kind.FREE and not r_chi > a:
        raise ValueError("cut-off radius must exceed the scatterer radius")
    if not r_chi > 0:
        raise ValueError("cut-off radius must be positive")
    kk = max(abs(complex(k)), 1e-8)
    dim = spec.dimension
    pieces = []  # (lo, hi, local wavelength, w, is_inside)
    if spec.kind is Kind.FREE:
        pieces.append((0.0, r_chi, 2 * np.pi / kk, 1.0, False))
    elif spec.kind is Kind.PENETRABLE:
        c, alpha = spec.contrast, spec.alpha
        pieces.append((0.0, a, 2 * np.pi * c / kk, 1.0 / (c * c * alpha), True))
        pieces.append((a, r_chi, 2 * np.pi / kk, 1.0, False))
    else:
        pieces.append((a, r_chi, 2 * np.pi / kk, 1.0, False))

    lengths = np.array([hi - lo for lo, hi, *_ in pieces])
    waves = np.array([lam for _, _, lam, *_ in pieces])
    if n_points is None:
        counts = np.maximum(np.ceil(points_per_wavelength * lengths / waves), min_intervals)
    else:
        share = lengths / waves
        counts = np.maximum(np.round(n_points * share / share.sum()), 2)
        if np.any(counts * waves / lengths < 16):
            raise ValueError("grid resolves fewer than 16 points per wavelength")
    counts = counts.astype(int)

    r_all, w_all, ins_all = [], [], []
    interface = None
    for (lo, hi, _, wmed, is_in), n in zip(pieces, counts):
        nodes = _piece(lo, hi, n)
        dr = (hi - lo) / n
        tw = np.full(n + 1, dr)
        tw[0] = tw[-1] = dr / 2
        mu = wmed * nodes ** (dim - 1)
        if r_all and np.isclose(r_all[-1][-1], nodes[0]):
            # shared interface node: accumulate both half-cells
            w_all[-1][-1] += tw[0] * mu[0]
            nodes, tw, mu = nodes[1:], tw[1:], mu[1:]
            interface = sum(x.size for x in r_all) - 1
        r_all.append(nodes)
        w_all.append(tw * mu)
        ins_all.append(np.full(nodes.size, is_in))
    r = np.concatenate(r_all)
    wts = np.concatenate(w_all)
    inside = np.concatenate(ins_all)
    if interface is not None:
        inside[interface] = False
    # drop r = 0 (zero weight) and a Dirichlet boundary node (u = 0 there)
    keep = r > 0
    if spec.kind is Kind.DIRICHLET:
        keep &= r > a
    idx = np.flatnonzero(keep)
    if interface is not None:
        interface = int(np.searchsorted(idx, interface))
    return RadialGrid(r=r[keep], weights=wts[keep], inside=inside[keep],
                      interface_index=interface, r_chi=float(r_chi))


# ---------------------------------------------------------------------------
# regular and outgoing solutions on the grid


@dataclass
class _ModeData:
    """Log-scaled solution values for modes ``l = 0..lmax`` on a grid.

    ``lp``/``ls``: regular solution ``p`` and a second global solution ``s``
    (divided by the flux Wronskian ``C(p, s) = sigma r^{d-1}(p's - ps')``).
    ``fl, gl, fr, gr``: the local medium's ``j`` and ``h`` (``h`` divided by
    its flux Wronskian with ``j``) at the left and right end of every grid
    interval.  ``lqr``: log of ``q(r_{n-2}) / q(r_{n-1})`` for the outgoing
    solution.
    """

    lp: np.ndarray
    ls: np.ndarray
    fl: np.ndarray
    gl: np.ndarray
    fr: np.ndarray
    gr: np.ndarray
    lqr: np.ndarray
    interface: int | None


def _mode_solutions(spec, k, grid, lmax):
    """Solution data for the modal three-point scheme (see :class:`_ModeData`).

    The interval Wronskians come from the local ``(j, h)`` pair, which never
    cancels, rather than from ``p`` and ``q``: near a resonance ``q`` is
    nearly proportional to ``p`` and in evanescent zones both are dominated
    by the same exponential.
    """
    dim = spec.dimension
    k = complex(k)
    r = grid.r
    L = lmax
    n = r.size
    ells = np.arange(L + 1)[:, None]
    out_mask = ~grid.inside
    lp = np.empty((L + 1, n), dtype=complex)
    ls = np.empty((L + 1, n), dtype=complex)

    ro = r[out_mask]
    ljo, lho = _ladder(dim, L, k * ro)
    ljo, lho = ljo[: L + 1], lho[: L + 1]
    lqr = lho[:, -2] - lho[:, -1]
    if dim == 3:
        lwc = np.log(-1j / k)  # r^2 (j'h - jh') in the r variable
    else:
        lwc = np.log(-2j / np.pi)

    # local basis per node; the interface node gets both media
    fo = np.empty((L + 1, n), dtype=complex)
    go = np.empty((L + 1, n), dtype=complex)
    fo[:, out_mask] = ljo
    go[:, out_mask] = lho - lwc
    fi, gi = fo, go
    iface = grid.interface_index

    if spec.kind is Kind.FREE:
        lp[:] = ljo
        ls[:] = lho - lwc
    else:
        a = spec.radius
        za = np.array([k * a])
        lja, lha = _ladder(dim, L, za)
        lj0a, lj1a = lja[: L + 1, 0], lja[1: L + 2, 0]
        lh0a, lh1a = lha[: L + 1, 0], lha[1: L + 2, 0]
        e = ells[:, 0]
        zs = za[0]
        # scaled j(ka), j'(ka), h(ka) = e^{lh0a}, h'(ka)
        sjo = np.maximum(lj0a.real, lj1a.real)
        jo = np.exp(lj0a - sjo)
        jpo = (e / zs) * jo - np.exp(lj1a - sjo)
        hpo = (e / zs) - np.exp(lh1a - lh0a)  # h'/h

        if spec.kind in (Kind.DIRICHLET, Kind.NEUMANN):
            if spec.kind is Kind.DIRICHLET:
                # p = j(kr) h(ka) - h(kr) j(ka)
                la1 = lh0a
                la2 = lj0a
            else:
                # p = j(kr) h'(ka) - h(kr) j'(ka)
                la1 = lh0a + np.log(hpo + 0j)
                la2 = sjo + np.log(jpo + 0j)
            lp[:] = _lse(la1[:, None] + ljo, la2[:, None] + lho, -1.0)
            ls[:] = lho - (la1[:, None] + lwc)
        else:
            c, alpha = spec.contrast, spec.alpha
            kap = k / c
            zi = kap * a
            ljia, lhia = _ladder(dim, L, np.array([zi]))
            lj0i, lj1i = ljia[: L + 1, 0], ljia[1: L + 2, 0]
            lh0i, lh1i = lhia[: L + 1, 0], lhia[1: L + 2, 0]
            sji = np.maximum(lj0i.real, lj1i.real)
            ji = np.exp(lj0i - sji)
            jpi = (e / zi) * ji - np.exp(lj1i - sji)
            hpi = (e / zi) - np.exp(lh1i - lh0i)  # h'/h at kappa a
            lwo = _log_wronskian(dim, zs)
            ratio = kap / (alpha * k)  # = 1/(c alpha)
            # flux Wronskian of j(kap r), h(kap r) inside
            lcs = np.log(-1j / (alpha * kap)) if dim == 3 else np.log(-2j / (alpha * np.pi))

            with np.errstate(divide="ignore"):
                # regular solution outside: A j(kr) + B h(kr)
                la = sji + lh0a + np.log(ji * hpo - ratio * jpi + 0j) - lwo
                lb = sji + sjo + np.log(ratio * jpi * jo - ji * jpo + 0j) - lwo
                # second solution outside: E j(kr) + F h(kr), continuing h(kap r)
                le = lh0i + lh0a + np.log(hpo - ratio * hpi + 0j) - lwo
                lf = lh0i + sjo + np.log(ratio * hpi * jo - jpo + 0j) - lwo
            lp[:, out_mask] = _lse(la[:, None] + ljo, lb[:, None] + lho)
            ls[:, out_mask] = _lse(le[:, None] + ljo, lf[:, None] + lho) - lcs

            ins = grid.inside.copy()
            if iface is not None:
                ins[iface] = True
            ri = r[ins]
            lji, lhi = _ladder(dim, L, kap * ri)
            fi = np.empty((L + 1, n), dtype=complex)
            gi = np.empty((L + 1, n), dtype=complex)
            fi[:, ins] = lji[: L + 1]
            gi[:, ins] = lhi[: L + 1] - lcs
            lp[:, grid.inside] = fi[:, grid.inside]
            ls[:, grid.inside] = gi[:, grid.inside]

    # interval i spans nodes i, i+1; it is interior iff node i is interior
    left_in = grid.inside[:-1]
    fl = np.where(left_in, fi[:, :-1], fo[:, :-1])
    gl = np.where(left_in, gi[:, :-1], go[:, :-1])
    fr = np.where(left_in, fi[:, 1:], fo[:, 1:])
    gr = np.where(left_in, gi[:, 1:], go[:, 1:])
    return _ModeData(lp, ls, fl, gl, fr, gr, lqr, iface)


def _green_inverse(md, weights):
    """Tridiagonal inverse of the weighted Green matrix, rows = modes.

    Returns (sub, diag, sup) with shapes (L, n-1), (L, n), (L, n-1).
    """
    ldelta = _lse(md.fl + md.gr, md.fr + md.gl, -1.0)  # Wronskian ratio per interval
    lp, ls = md.lp, md.ls
    with np.errstate(over="ignore", under="ignore"):
        off = np.exp(-ldelta)
    n = lp.shape[1]
    diag = np.empty(lp.shape, dtype=complex)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        diag[:, 0] = -np.exp(lp[:, 1] - lp[:, 0] - ldelta[:, 0])
        diag[:, -1] = -np.exp(md.lqr - ldelta[:, -1])
        if n > 2:
            dm, dc = ldelta[:, :-1], ldelta[:, 1:]

            def row(um, u0, up):
                val = -(np.exp(um - u0 - dm) + np.exp(up - u0 - dc))
                score = u0.real - np.maximum(um.real, up.real)
                return val, score

            df, sf_ = row(md.fl[:, :-1], md.fl[:, 1:], md.fr[:, 1:])
            dg, sg = row(md.gl[:, :-1], md.gl[:, 1:], md.gr[:, 1:])
            inner = np.where(sf_ >= sg, df, dg)
            if md.interface is not None and 0 < md.interface < n - 1:
                i = md.interface
                d0, d1 = ldelta[:, i - 1], ldelta[:, i]
                vals = []
                for u in (lp, ls):
                    v = -(np.exp(u[:, i - 1] - u[:, i] - d0) + np.exp(u[:, i + 1] - u[:, i] - d1))
                    sc = u[:, i].real - np.maximum(u[:, i - 1].real, u[:, i + 1].real)
                    vals.append((v, sc))
                (vp, sp), (vs, ss) = vals
                inner[:, i - 1] = np.where(sp >= ss, vp, vs)
            diag[:, 1:-1] = inner
    dinv = 1.0 / np.sqrt(weights)
    sup = off * dinv[:-1] * dinv[1:]
    diag = diag * dinv * dinv
    if not (np.all(np.isfinite(sup)) and np.all(np.isfinite(diag))):
        raise NumericalFailure("non-finite entries in the modal three-point scheme")
    return sup, diag, sup


# ---------------------------------------------------------------------------
# largest singular value of the inverse of a tridiagonal matrix




def _start_vector(n):
    g = np.random.default_rng(n)
    v = g.standard_normal(n) + 1j * g.standard_normal(n)
    return v / np.linalg.norm(v)


class _TridiagonalLU:
    def __init__(self, sub, diag, sup):
        dl, d, du, du2, ipiv, info = lapack.zgttrf(sub, diag, sup)
        if info != 0:
            raise NumericalFailure(f"pivot failure in tridiagonal factorization (info={info})")
        self._f = (dl, d, du, du2, ipiv)
        self.n = diag.size

    def solve(self, b, trans="N"):
        dl, d, du, du2, ipiv = self._f
        x, info = lapack.zgttrs(dl, d, du, du2, ipiv, b, trans=trans)
        if info != 0:
            raise NumericalFailure("tridiagonal solve failed")
        return x


def _inverse_norm(sub, diag, sup, rtol=1e-10, max_steps=80):
    """Largest singular value of T^{-1} by Lanczos on T^{-H} T^{-1}."""
    lu = _TridiagonalLU(sub, diag, sup)
    n = lu.n
    m = min(n, max_steps)
    v = _start_vector(n)
    basis = np.empty((m + 1, n), dtype=complex)
    basis[0] = v
    alphas, betas = [], []
    prev = None
    for j in range(m):
        w = lu.solve(lu.solve(basis[j]), trans="C")
        a = np.vdot(basis[j], w).real
        w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        b = np.linalg.norm(w)
        alphas.append(a)
        if j >= 2 or b == 0 or j == m - 1:
            if j == 0:
                top = a
            else:
                top = eigh_tridiagonal(np.array(alphas), np.array(betas),
                                       eigvals_only=True, select="i",
                                       select_range=(j, j))[0]
            if prev is not None and abs(top - prev) <= rtol * abs(top):
                return math.sqrt(max(top, 0.0))
            prev = top
        if b <= 1e-300 or j == m - 1:
            break
        betas.append(b)
        basis[j + 1] = w / b
    return math.sqrt(max(prev if prev is not None else alphas[0], 0.0))


# ---------------------------------------------------------------------------
# public resolvent surface


@dataclass
class ResolventEstimate:
    """Cut-off resolvent norm at one frequency with its per-mode breakdown."""

    k: complex
    norm: float
    argmax_mode: int
    per_mode: list = field(default_factory=list)  # [(ell, modal norm)]


def default_l_max(k, r_chi):
    return int(math.ceil(1.3 * abs(k) * r_chi)) + 20


def _check_k(k):
    k = complex(k)
    if k.imag < 0 or (k.imag == 0 and k.real <= 0):
        raise ValueError("k must be real positive or lie in the upper half-plane")
    return k


def modal_norms(spec, k, r_chi, l_max=None, grid=None, n_r=None):
    """Per-mode norms of the cut-off modal resolvents, ``l = 0..l_max``."""
    k = _check_k(k)
    if l_max is None:
        l_max = default_l_max(k, r_chi)
    if grid is None:
        grid = radial_grid(spec, k, r_chi, n_points=n_r)
    sub, diag, sup = _green_inverse(_mode_solutions(spec, k, grid, l_max), grid.weights)
    return np.array([_inverse_norm(sub[l], diag[l], sup[l]) for l in range(l_max + 1)])


def resolvent_norm(spec, k, r_chi, l_max=None, n_r=None, check_tail=True):
    """Estimate ``||chi R(k) chi||`` as the largest modal norm.

    Parameters
    ----------
    spec : ScattererSpec
    k : float or complex
        Frequency, real positive or in the upper half-plane.
    r_chi : float
        Radius of the cut-off support.
    l_max : int, optional
        Highest angular mode; defaults to ``ceil(1.3 k r_chi) + 20``.
    n_r : int, optional
        Total number of radial nodes; defaults to 20 points per local wavelength.

    Raises
    ------
    TruncationError
        If the per-mode norms are not decaying at ``l_max``.
    """
    k = _check_k(k)
    if l_max is None:
        l_max = default_l_max(k, r_chi)
    elif l_max < 1.2 * abs(k) * spec.reference_radius + 20:
        raise ValueError("l_max must be at least 1.2 k a + 20")
    norms = modal_norms(spec, k, r_chi, l_max=l_max, n_r=n_r)
    if check_tail:
        _check_tail(norms)
    ell = int(np.argmax(norms))
    return ResolventEstimate(k=k, norm=float(norms[ell]), argmax_mode=ell,
                             per_mode=[(l, float(v)) for l, v in enumerate(norms)])


def _check_tail(norms):
    tail = norms[-6:]
    if np.argmax(norms) >= norms.size - 5 or np.any(np.diff(tail) > 0):
        raise TruncationError("modal norms are not decaying at l_max; raise l_max")


def apply_resolvent(spec, k, source, ell, grid, rtol=1e-8):
    """Solve the discretized modal problem ``(P_l - k^2) u = f`` on ``grid``.

    ``source`` holds ``f`` at the grid nodes; the result is ``u`` there.
    """
    k = complex(k)
    f = np.asarray(source, dtype=complex)
    if f.shape != grid.r.shape:
        raise ValueError("source must be sampled on the grid nodes")
    sub, diag, sup = _single_mode_scheme(spec, k, ell, grid)
    d = np.sqrt(grid.weights)
    rhs = d * f
    lu = _TridiagonalLU(sub, diag, sup)
    y = lu.solve(rhs)
    for _ in range(2):
        res = rhs - _tridiag_matvec(sub, diag, sup, y)
        scale = np.linalg.norm(rhs)
        if scale == 0 or np.linalg.norm(res) <= rtol * scale:
            break
        y = y + lu.solve(res)
    res = rhs - _tridiag_matvec(sub, diag, sup, y)
    if np.linalg.norm(rhs) > 0 and np.linalg.norm(res) > rtol * np.linalg.norm(rhs):
        raise NumericalFailure("modal solve residual above tolerance")
    return y / d


def _single_mode_scheme(spec, k, ell, grid):
    sub, diag, sup = _green_inverse(_mode_solutions(spec, complex(k), grid, ell), grid.weights)
    return sub[ell], diag[ell], sup[ell]


def _tridiag_matvec(sub, diag, sup, x):
    y = diag * x
    y[:-1] += sup * x[1:]
    y[1:] += sub * x[:-1]
    return y


def apply_operator(spec, k, u, ell, grid):
    """Apply the discrete ``P_l - k^2`` (inverse of the sampled Green kernel) to ``u``."""
    sub, diag, sup = _single_mode_scheme(spec, k, ell, grid)
    d = np.sqrt(grid.weights)
    return _tridiag_matvec(sub, diag, sup, d * np.asarray(u, dtype=complex)) / d


def regular_solution(spec, k, ell, grid):
    """Log of the regular modal solution at the grid nodes (interior j_l normalization)."""
    md = _mode_solutions(spec, complex(k), grid, ell)
    return md.lp[ell]


def regular_profile(spec, k, ell, r):
    """Regular modal solution ``p`` and ``dp/dr`` at radii ``r`` (interior ``j_l`` normalization).

    Inside a penetrable ball ``p = j_l(kr/c)``; outside, the transmission
    continuation ``A j_l(kr) + B h_l(kr)``.  Free space uses ``j_l(kr)``;
    Dirichlet/Neumann balls the combination vanishing (in value or slope) at ``r = a``.
    """
    dim = spec.dimension
    k = complex(k)
    r = np.asarray(r, dtype=float)
    p = np.zeros(r.shape, dtype=complex)
    dp = np.zeros(r.shape, dtype=complex)

    def basis(kk, rr):
        lj, lh = _pair(dim, ell, kk * rr)
        z = kk * rr
        with np.errstate(under="ignore", over="ignore"):
            j, j1 = np.exp(lj[0]), np.exp(lj[1])
            h, h1 = np.exp(lh[0]), np.exp(lh[1])
        return j, kk * ((ell / z) * j - j1), h, kk * ((ell / z) * h - h1)

    if spec.kind is Kind.FREE:
        pos = r > 0
        j, jd, _, _ = basis(k, r[pos])
        p[pos], dp[pos] = j, jd
        p[~pos] = 1.0 if ell == 0 else 0.0
        dp[~pos] = (k / 3.0 if (ell == 1 and dim == 3) else (k / 2 if (ell == 1) else 0.0))
        return p, dp
    a = spec.radius
    out = r >= a
    if spec.kind in (Kind.DIRICHLET, Kind.NEUMANN):
        ja, jda, ha, hda = basis(k, np.array([a]))
        u, v = (ha[0], ja[0]) if spec.kind is Kind.DIRICHLET else (hda[0] / k, jda[0] / k)
        j, jd, h, hd = basis(k, r[out])
        p[out] = u * j - v * h
        dp[out] = u * jd - v * hd
        return p, dp
    c, alpha = spec.contrast, spec.alpha
    kap = k / c
    ji, jdi, _, _ = basis(kap, np.array([a]))
    jo, jdo, ho, hdo = basis(k, np.array([a]))
    w = jo[0] * hdo[0] - jdo[0] * ho[0]
    flux = jdi[0] / alpha  # outside slope required by the flux condition
    A = (ji[0] * hdo[0] - flux * ho[0]) / w
    B = (flux * jo[0] - ji[0] * jdo[0]) / w
    j, jd, h, hd = basis(k, r[out])
    p[out] = A * j + B * h
    dp[out] = A * jd + B * hd
    ins = (~out) & (r > 0)
    j, jd, _, _ = basis(kap, r[ins])
    p[ins], dp[ins] = j, jd
    zero = r == 0
    p[zero] = 1.0 if ell == 0 else 0.0
    return p, dp
