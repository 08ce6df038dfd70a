"""Nyström discretization of 2-d Helmholtz layer operators on circles.

Kernels use ``Phi(x, y) = (i/4) H_0^(1)(k|x - y|)`` with outward normals, so
that ``A = I/2 + D - i eta S`` is the combined-field operator of the exterior
Dirichlet problem and ``A' = I/2 + D' - i eta S`` its adjoint-type partner.
Self-interaction blocks use Kress's splitting of the logarithmic singularity
(spectrally accurate on smooth curves); blocks between distinct components are
smooth and use the plain trapezoidal rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import special as sp

from .errors import ConfigError

EULER_GAMMA = 0.5772156649015329
TAGS = ("S", "D", "Dprime", "A", "Aprime")


@dataclass
class Curve:
    """Union of parametrized circles sampled at ``n_per`` equispaced parameters each."""

    kind: str
    radius: float
    gap: float | None
    n_per: int
    centers: np.ndarray  # (m, 2)
    x: np.ndarray = field(repr=False)  # (N, 2) positions
    dx: np.ndarray = field(repr=False)  # dx/dt
    ddx: np.ndarray = field(repr=False)  # d^2x/dt^2
    normal: np.ndarray = field(repr=False)  # outward unit normal
    component: np.ndarray = field(repr=False)  # component index per node

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def speed(self):
        return np.hypot(self.dx[:, 0], self.dx[:, 1])

    @property
    def curvature(self):
        return (self.dx[:, 0] * self.ddx[:, 1] - self.dx[:, 1] * self.ddx[:, 0]) / self.speed ** 3

    @property
    def weights(self):
        """Trapezoidal arc-length weights."""
        return self.speed * (2 * math.pi / self.n_per)

    @property
    def diameter(self):
        c = self.centers
        span = max(np.hypot(*(c[i] - c[j])) for i in range(len(c)) for j in range(len(c)))
        return float(span + 2 * self.radius)

    def required_n(self, k):
        n = int(math.ceil(16 * k * self.diameter))
        return n + (n % 2)


def _circles(kind, radius, gap, centers, n_per):
    if n_per < 8 or n_per % 2:
        raise ConfigError("points per component must be even and at least 8")
    if not radius > 0:
        raise ConfigError("radius must be positive")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    t = 2 * np.pi * np.arange(n_per) / n_per
    ct, st = np.cos(t), np.sin(t)
    xs, dxs, ddxs, nrm, comp = [], [], [], [], []
    for m, c in enumerate(centers):
        xs.append(np.column_stack([c[0] + radius * ct, c[1] + radius * st]))
        dxs.append(np.column_stack([-radius * st, radius * ct]))
        ddxs.append(np.column_stack([-radius * ct, -radius * st]))
        nrm.append(np.column_stack([ct, st]))
        comp.append(np.full(n_per, m))
    return Curve(kind=kind, radius=radius, gap=gap, n_per=n_per, centers=centers,
                 x=np.vstack(xs), dx=np.vstack(dxs), ddx=np.vstack(ddxs),
                 normal=np.vstack(nrm), component=np.concatenate(comp))


def circle(radius=1.0, n=256):
    return _circles("circle", radius, None, [(0.0, 0.0)], n)


def two_circles(radius=1.0, gap=2.0, n_per=256):
    """Two equal circles on the x-axis whose closest points are ``gap`` apart."""
    if not gap > 0:
        raise ConfigError("gap must be positive")
    d = radius + 0.5 * gap
    return _circles("two_circles", radius, gap, [(-d, 0.0), (d, 0.0)], n_per)


@dataclass
class BoundaryOperatorMatrix:
    matrix: np.ndarray
    tag: str
    k: float
    eta: float | None
    weights: np.ndarray  # arc-length quadrature weights of the nodes


def _log_weights(n):
    """Weights ``R_j`` with ``int ln(4 sin^2((t - s)/2)) f(s) ds ~ sum_j R_{|i-j|} f(t_j)``."""
    m = np.arange(1, n // 2)
    theta = 2 * np.pi * np.arange(n) / n
    r = -(4 * np.pi / n) * (np.cos(np.outer(theta, m)) / m).sum(axis=1)
    r -= (4 * np.pi / n ** 2) * np.cos(0.5 * n * theta)
    return r


def _layer_kernels(curve, k):
    """Nyström matrices of S, D and D' for the curve at wavenumber ``k``."""
    x, nrm = curve.x, curve.normal
    speed = curve.speed
    n = curve.n
    npc = curve.n_per
    diff = x[:, None, :] - x[None, :, :]  # x_i - y_j
    r = np.hypot(diff[..., 0], diff[..., 1])
    same = curve.component[:, None] == curve.component[None, :]
    diag = np.eye(n, dtype=bool)
    rs = np.where(diag, 1.0, r)
    kr = k * rs
    h0 = sp.hankel1(0, kr)
    h1 = sp.hankel1(1, kr)
    ny_dot = np.einsum("ijk,jk->ij", diff, nrm) / rs  # n_y . (x - y) / r
    nx_dot = np.einsum("ijk,ik->ij", diff, nrm) / rs  # n_x . (x - y) / r
    sj = speed[None, :]
    ks = 0.25j * h0 * sj
    kd = 0.25j * k * h1 * ny_dot * sj
    kdp = -0.25j * k * h1 * nx_dot * sj

    # log-singular parts inside each component
    j0 = sp.j0(kr)
    j1 = sp.j1(kr)
    s1 = np.where(same, -j0 * sj / (4 * np.pi), 0.0)
    d1 = np.where(same, -k * j1 * ny_dot * sj / (4 * np.pi), 0.0)
    dp1 = np.where(same, k * j1 * nx_dot * sj / (4 * np.pi), 0.0)
    t = 2 * np.pi * (np.arange(n) % npc) / npc
    near = same & ~diag
    lg = np.log(np.where(near, 4 * np.sin(0.5 * (t[:, None] - t[None, :])) ** 2, 1.0))
    s2 = ks - s1 * lg
    d2 = kd - d1 * lg
    dp2 = kdp - dp1 * lg
    # diagonal limits
    sd = speed
    kappa_term = np.einsum("ik,ik->i", nrm, curve.ddx) / sd  # n . x'' / |x'|
    s2[diag] = (0.25j - (np.log(0.5 * k * sd) + EULER_GAMMA) / (2 * np.pi)) * sd
    d2[diag] = kappa_term / (4 * np.pi)
    dp2[diag] = kappa_term / (4 * np.pi)
    s1[diag] = -sd / (4 * np.pi)
    d1[diag] = 0.0
    dp1[diag] = 0.0

    rw = _log_weights(npc)
    idx = np.arange(n) % npc
    R = np.where(same, rw[(idx[:, None] - idx[None, :]) % npc], 0.0)
    h = 2 * np.pi / npc
    S = R * s1 + h * s2
    D = R * d1 + h * d2
    Dp = R * dp1 + h * dp2
    return S, D, Dp


def assemble(curve, k, eta=None, tag="A", check_resolution=True):
    """Nyström matrix of ``S``, ``D``, ``Dprime``, ``A`` or ``Aprime`` (``eta`` defaults to ``k``)."""
    if tag not in TAGS:
        raise ConfigError(f"tag must be one of {TAGS}")
    if not k > 0:
        raise ConfigError("k must be positive")
    if check_resolution and curve.n < curve.required_n(k):
        raise ConfigError(f"under-resolved: N = {curve.n} < {curve.required_n(k)} needed at k = {k:g}")
    eta = k if eta is None else eta
    S, D, Dp = _layer_kernels(curve, k)
    half = 0.5 * np.eye(curve.n)
    mat = {"S": S, "D": D, "Dprime": Dp,
           "A": half + D - 1j * eta * S, "Aprime": half + Dp - 1j * eta * S}[tag]
    return BoundaryOperatorMatrix(matrix=mat, tag=tag, k=float(k),
                                  eta=None if tag in ("S", "D", "Dprime") else float(eta),
                                  weights=curve.weights)


def assemble_pair(curve, k, eta=None, check_resolution=True):
    """``(A, A')`` sharing one kernel evaluation."""
    if check_resolution and curve.n < curve.required_n(k):
        raise ConfigError(f"under-resolved: N = {curve.n} < {curve.required_n(k)} needed at k = {k:g}")
    eta = k if eta is None else eta
    S, D, Dp = _layer_kernels(curve, k)
    half = 0.5 * np.eye(curve.n)
    w = curve.weights
    return (BoundaryOperatorMatrix(half + D - 1j * eta * S, "A", float(k), float(eta), w),
            BoundaryOperatorMatrix(half + Dp - 1j * eta * S, "Aprime", float(k), float(eta), w))


def _l2_matrix(m):
    if isinstance(m, BoundaryOperatorMatrix):
        s = np.sqrt(m.weights)
        return s[:, None] * m.matrix / s[None, :]
    return np.asarray(m)


def inv_norm(m, rcond=1e-13, return_condition=False):
    """``||M^{-1}||`` in ``L^2`` of the curve (plain 2-norm for a bare array).

    Returns ``inf`` (and ``singular=True`` with ``return_condition``) when
    the smallest singular value is below ``rcond`` times the largest.
    """
    # dense SVD: layer spectra cluster near 1/2, which stalls Krylov estimates
    s = sla.svdvals(_l2_matrix(m))
    smin, smax = s[-1], s[0]
    singular = smin <= rcond * smax
    val = math.inf if singular else 1.0 / smin
    return (val, singular) if return_condition else val


@dataclass
class SweepRow:
    k: float
    inv_norm_A: float
    inv_norm_Aprime: float
    spike_flag: bool = False


def spike_sweep(curve, ks, eta_factor=1.0, ratio=10.0, window=25, check_resolution=True):
    """Inverse norms of ``A`` and ``A'`` over ``ks`` with ``eta = eta_factor * k``.

    A sample is flagged as a spike when it is a local maximum of
    ``||A^{-1}||`` at least ``ratio`` times the median of the ``window``
    samples on either side.
    """
    ks = np.asarray(ks, dtype=float)
    rows = []
    for k in ks:
        a, ap = assemble_pair(curve, k, eta_factor * k, check_resolution=check_resolution)
        rows.append(SweepRow(k=float(k), inv_norm_A=inv_norm(a), inv_norm_Aprime=inv_norm(ap)))
    flags = detect_spikes([r.inv_norm_A for r in rows], ratio=ratio, window=window)
    for r, f in zip(rows, flags):
        r.spike_flag = bool(f)
    return rows


def detect_spikes(values, ratio=10.0, window=25):
    v = np.asarray(values, dtype=float)
    out = np.zeros(v.size, dtype=bool)
    for i in range(v.size):
        lo, hi = max(0, i - window), min(v.size, i + window + 1)
        if v[i] < v[lo:hi].max():
            continue
        if 0 < i < v.size - 1 and v[i] >= ratio * np.median(v[lo:hi]):
            out[i] = True
    return out


def local_maxima(values):
    """Indices of strict interior local maxima."""
    v = np.asarray(values, dtype=float)
    return np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1


def spike_spacing(rows):
    """Mean spacing of flagged spikes (nan with fewer than two)."""
    ks = [r.k for r in rows if r.spike_flag]
    return float(np.mean(np.diff(ks))) if len(ks) >= 2 else float("nan")


def circle_eigenvalues(k, radius, m):
    """Eigenvalues of S, D and D' on mode ``e^{i m t}`` of a circle."""
    z = k * radius
    jm, hm = sp.jv(m, z), sp.hankel1(m, z)
    jpm, hpm = sp.jvp(m, z), sp.h1vp(m, z)
    s = 0.5j * math.pi * radius * jm * hm
    d = 0.5j * math.pi * z * jm * hpm + 0.5  # from the jump of the double layer
    return s, d, d
