"""Extended-precision evaluation of single modal problems.

Resonances of strongly trapping scatterers can sit far closer to the real
axis than double precision resolves (``|Im k| ~ 1e-24`` at ``k ~ 40`` for
``c = 1/2``).  The routines here rebuild the same three-point modal scheme as
:mod:`trapped_wave.modal` with mpmath, so spikes of the cut-off resolvent can be
sampled on their true width.  They are slow (milliseconds per Bessel value)
and meant for one mode at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import NumericalFailure
from .modal import radial_grid, resolvent_norm
from .scatterers import Kind


def _dps_for(im_k):
    lost = -math.log10(abs(im_k)) if im_k != 0 else 30.0
    return int(max(30, 25 + 2 * math.ceil(max(lost, 0.0))))


def _fj(dim, ell, z):
    if dim == 3:
        return mp.sqrt(mp.pi / (2 * z)) * mp.besselj(ell + mp.mpf(1) / 2, z)
    return mp.besselj(ell, z)


def _fh(dim, ell, z):
    if dim == 3:
        return mp.sqrt(mp.pi / (2 * z)) * mp.hankel1(ell + mp.mpf(1) / 2, z)
    return mp.hankel1(ell, z)


def _with_derivative(f, dim, ell, z):
    v0 = f(dim, ell, z)
    v1 = f(dim, ell + 1, z)
    return v0, (ell / z) * v0 - v1


def mp_determinant(spec, ell, k):
    """Modal determinant evaluated with mpmath at the current working precision."""
    dim = spec.dimension
    k = mp.mpc(k)
    a = mp.mpf(spec.reference_radius)
    h, hp = _with_derivative(_fh, dim, ell, k * a)
    if spec.kind is Kind.DIRICHLET:
        return h
    if spec.kind is Kind.NEUMANN:
        return hp
    if spec.kind is Kind.FREE:
        c, alpha = mp.mpf(1), mp.mpf(1)
    else:
        c, alpha = mp.mpf(spec.contrast), mp.mpf(spec.alpha)
    j, jp = _with_derivative(_fj, dim, ell, k * a / c)
    return (k / c) * jp * h - alpha * k * j * hp


def mp_root(spec, ell, k_guess, dps=None):
    """Refine a resonance to ``dps`` digits; returns an ``mpc``."""
    if dps is None:
        dps = _dps_for(complex(k_guess).imag)
    with mp.workdps(dps):
        k = mp.findroot(lambda x: mp_determinant(spec, ell, x), mp.mpc(k_guess))
        return +k


def _mode_solutions(spec, k, grid, ell):
    """Regular solution p and q/C at the grid nodes (lists of mpc)."""
    dim = spec.dimension
    k = mp.mpc(k)
    r = [mp.mpf(float(x)) for x in grid.r]
    cw_factor = (-1j / k) if dim == 3 else (-2j / mp.pi)
    if spec.kind is Kind.FREE:
        p = [_fj(dim, ell, k * x) for x in r]
        q = [_fh(dim, ell, k * x) / cw_factor for x in r]
        return p, q
    a = mp.mpf(spec.radius)
    jo, jpo = _with_derivative(_fj, dim, ell, k * a)
    ho, hpo = _with_derivative(_fh, dim, ell, k * a)
    if spec.kind in (Kind.DIRICHLET, Kind.NEUMANN):
        u, v = (ho, jo) if spec.kind is Kind.DIRICHLET else (hpo, jpo)
        p = [_fj(dim, ell, k * x) * u - _fh(dim, ell, k * x) * v for x in r]
        cw = u * cw_factor
        q = [_fh(dim, ell, k * x) / cw for x in r]
        return p, q
    c, alpha = mp.mpf(spec.contrast), mp.mpf(spec.alpha)
    kap = k / c
    ji, jpi = _with_derivative(_fj, dim, ell, kap * a)
    hi, hpi = _with_derivative(_fh, dim, ell, kap * a)
    ratio = kap / (alpha * k)
    w_out = jo * hpo - jpo * ho
    w_in = ji * hpi - jpi * hi
    A = (ji * hpo - ratio * jpi * ho) / w_out
    B = (ratio * jpi * jo - ji * jpo) / w_out
    C = (ho * hpi - hpo * hi / ratio) / w_in
    D = (hpo * ji / ratio - ho * jpi) / w_in
    cw = A * cw_factor
    p, q = [], []
    for x, inside in zip(r, grid.inside):
        if inside:
            p.append(_fj(dim, ell, kap * x))
            q.append((C * _fj(dim, ell, kap * x) + D * _fh(dim, ell, kap * x)) / cw)
        else:
            hv = _fh(dim, ell, k * x)
            p.append(A * _fj(dim, ell, k * x) + B * hv)
            q.append(hv / cw)
    return p, q


def _scheme(p, q, weights):
    """(sub, diag, sup) of the weighted three-point scheme as mpc lists."""
    n = len(p)
    delta = [p[i] * q[i + 1] - p[i + 1] * q[i] for i in range(n - 1)]
    off = [1 / d for d in delta]
    diag = [None] * n
    diag[0] = -p[1] / (p[0] * delta[0])
    diag[-1] = -q[-2] / (q[-1] * delta[-1])
    for i in range(1, n - 1):
        sp = abs(p[i]) / max(abs(p[i - 1]), abs(p[i + 1]))
        sq = abs(q[i]) / max(abs(q[i - 1]), abs(q[i + 1]))
        if sp >= sq:
            diag[i] = -(p[i - 1] / delta[i - 1] + p[i + 1] / delta[i]) / p[i]
        else:
            diag[i] = -(q[i - 1] / delta[i - 1] + q[i + 1] / delta[i]) / q[i]
    dinv = [1 / mp.sqrt(mp.mpf(float(w))) for w in weights]
    sup = [off[i] * dinv[i] * dinv[i + 1] for i in range(n - 1)]
    diag = [diag[i] * dinv[i] ** 2 for i in range(n)]
    return sup, diag, sup


def _thomas(sub, diag, sup, b):
    n = len(diag)
    c = [mp.mpc(0)] * n
    d = [mp.mpc(0)] * n
    piv = diag[0]
    if piv == 0:
        raise NumericalFailure("zero pivot in extended-precision solve")
    c[0] = sup[0] / piv if n > 1 else 0
    d[0] = b[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i - 1] * c[i - 1]
        if piv == 0:
            raise NumericalFailure("zero pivot in extended-precision solve")
        if i < n - 1:
            c[i] = sup[i] / piv
        d[i] = (b[i] - sub[i - 1] * d[i - 1]) / piv
    x = [mp.mpc(0)] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _inverse_norm(sub, diag, sup, iters=12):
    """Largest singular value of T^{-1} by power iteration on T^{-H} T^{-1}."""
    n = len(diag)
    g = np.random.default_rng(n)
    x = [mp.mpc(float(a), float(b)) for a, b in zip(g.standard_normal(n), g.standard_normal(n))]
    subh = [mp.conj(s) for s in sup]
    suph = [mp.conj(s) for s in sub]
    diagh = [mp.conj(s) for s in diag]
    lam = mp.mpf(0)
    for _ in range(iters):
        nx = mp.sqrt(mp.fsum(abs(v) ** 2 for v in x))
        x = [v / nx for v in x]
        y = _thomas(sub, diag, sup, x)
        x_new = _thomas(subh, diagh, suph, y)
        lam_new = mp.sqrt(mp.fsum(abs(v) ** 2 for v in x_new))
        if lam and abs(lam_new - lam) <= mp.mpf(10) ** (-12) * lam_new:
            lam = lam_new
            break
        lam = lam_new
        x = x_new
    return mp.sqrt(lam)


def mode_norm(spec, k, ell, grid, dps=40):
    """Modal resolvent norm of mode ``ell`` at ``k`` (mpc allowed) in extended precision."""
    with mp.workdps(dps):
        p, q = _mode_solutions(spec, k, grid, ell)
        return float(_inverse_norm(*_scheme(p, q, grid.weights)))


@dataclass
class SpikeProfile:
    """Resolvent norm sampled across one resonance spike."""

    k_res: complex
    ell: int
    center: str  # Re k_res to full extended precision, as a decimal string
    offsets: np.ndarray  # real frequency offsets from the centre
    norms: np.ndarray
    background: float  # largest norm of the remaining modes at the centre

    @property
    def peak(self):
        return float(np.max(self.norms))

    def fwhm(self):
        """Full width at half maximum, by linear interpolation between samples."""
        y = self.norms
        x = self.offsets
        i = int(np.argmax(y))
        half = 0.5 * y[i]
        left = right = None
        for j in range(i, 0, -1):
            if y[j - 1] < half <= y[j]:
                left = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
                break
        for j in range(i, y.size - 1):
            if y[j + 1] < half <= y[j]:
                right = x[j] + (y[j] - half) * (x[j + 1] - x[j]) / (y[j] - y[j + 1])
                break
        if left is None or right is None:
            return float("nan")
        return float(right - left)


def spike_profile(spec, k_res, ell, r_chi, half_width=15.0, samples=61, grid=None):
    """Sample the cut-off resolvent norm across the spike of a near-real resonance.

    Offsets span ``half_width * |Im k_res|`` on either side of ``Re k_res``;
    the scheme is rebuilt in extended precision and expanded to second order
    in the frequency offset, which is exact far below the sampled scale.
    """
    k_res = complex(k_res)
    gamma = abs(k_res.imag)
    dps = _dps_for(gamma)
    kr = mp_root(spec, ell, k_res, dps)
    if grid is None:
        grid = radial_grid(spec, kr.real, r_chi)
    offsets = np.linspace(-half_width, half_width, samples) * gamma
    with mp.workdps(dps):
        k0 = mp.mpf(kr.real)
        eta = mp.mpf(gamma) * 100
        mats = []
        for kk in (k0 - eta, k0, k0 + eta):
            p, q = _mode_solutions(spec, kk, grid, ell)
            mats.append(_scheme(p, q, grid.weights))
        (sm, dm, _), (s0, d0, _), (sp, dp_, _) = mats
        norms = []
        for off in offsets:
            t = mp.mpf(off) / eta
            w0, w1, w2 = t * (t - 1) / 2, 1 - t * t, t * (t + 1) / 2
            sub = [w0 * a + w1 * b + w2 * c for a, b, c in zip(sm, s0, sp)]
            diag = [w0 * a + w1 * b + w2 * c for a, b, c in zip(dm, d0, dp_)]
            norms.append(float(_inverse_norm(sub, diag, sub)))
        center = mp.nstr(k0, dps - 5)
    others = resolvent_norm(spec, float(kr.real), r_chi, check_tail=False)
    background = max((v for l, v in others.per_mode if l != ell), default=0.0)
    norms = np.maximum(np.array(norms), background)
    return SpikeProfile(k_res=complex(kr), ell=ell, center=center, offsets=offsets,
                        norms=norms, background=background)
