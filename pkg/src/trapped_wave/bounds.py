"""Coordinate-change checks, envelope fits and quasimode lower bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NotApplicableError, NumericalFailure
from .modal import apply_operator, radial_grid, regular_profile

# cap reported when the quasimode residual vanishes to round-off
BOUND_CAP = 1e16


@dataclass
class BoxImage:
    h: float
    c1: float
    c2: float
    contained: bool
    violations: int
    samples: int
    max_re: float  # largest Re of the image, in units of 1/h
    max_abs_im: float

    @property
    def re_box(self):
        return (1.0 / self.h, (1.0 + self.c1 * self.h ** 2) / self.h)


def box_image_contains(h, c1=0.7, c2=1.1, samples=10_000, seed=0):
    """Check that ``z -> sqrt(z)/h`` maps ``[1, 1+h^2] + i[-h, h]`` into
    ``[1/h, (1 + c1 h^2)/h] + i[-c2, c2]``.

    The four corners are always included besides ``samples`` uniform points.
    """
    if not 0 < h <= 0.3:
        raise ConfigError("h must lie in (0, 0.3]")
    if not c1 > 5 / 8 or not c2 > 1:
        raise ConfigError("need c1 > 5/8 and c2 > 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(1.0, 1.0 + h * h, samples)
    y = rng.uniform(-h, h, samples)
    corners = np.array([1, 1 + h * h, 1 + 1j * h, 1 - 1j * h,
                        1 + h * h + 1j * h, 1 + h * h - 1j * h])
    z = np.concatenate([x + 1j * y, corners])
    w = np.sqrt(z) / h
    lo, hi = 1.0 / h, (1.0 + c1 * h * h) / h
    tol = 1e-12 * hi
    ok = (w.real >= lo - tol) & (w.real <= hi + tol) & (np.abs(w.imag) <= c2)
    bad = int(np.count_nonzero(~ok))
    return BoxImage(h=h, c1=c1, c2=c2, contained=bad == 0, violations=bad,
                    samples=z.size, max_re=float(w.real.max() * h),
                    max_abs_im=float(np.abs(w.imag).max()))


@dataclass
class EnvelopeFit:
    slope: float
    intercept: float
    max_residual: float
    n_used: int
    predicted: float | None = None

    @property
    def within_prediction(self):
        return None if self.predicted is None else self.slope <= self.predicted


def fit_envelope(sweep, mask=None, predicted=None, min_samples=50):
    """Least-squares line through ``(log k, log norm)`` over samples outside ``mask``.

    ``sweep`` is a sequence of ``(k, norm)`` pairs; ``mask`` anything with a
    ``contains(k)`` method (an :class:`ExclusionSet`), or None.
    """
    data = np.asarray(list(sweep), dtype=float).reshape(-1, 2)
    keep = np.ones(len(data), dtype=bool)
    if mask is not None:
        keep = np.array([not mask.contains(k) for k in data[:, 0]], dtype=bool)
    data = data[keep]
    data = data[np.isfinite(data).all(axis=1) & (data[:, 1] > 0)]
    if len(data) < min_samples:
        raise NotApplicableError(f"only {len(data)} unmasked samples, need {min_samples}")
    k = data[:, 0]
    if k.max() < 2 * k.min():
        raise NotApplicableError("unmasked samples span less than one octave")
    x, y = np.log(k), np.log(data[:, 1])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return EnvelopeFit(slope=float(slope), intercept=float(intercept),
                       max_residual=float(np.abs(resid).max()), n_used=int(len(data)),
                       predicted=predicted)


def smooth_cutoff(r, a, b):
    """Degree-7 step falling from 1 at ``r = a`` to 0 at ``r = b``, with two derivatives.

    Returns ``(chi, chi', chi'')``; the step is C^3 at both ends.
    """
    r = np.asarray(r, dtype=float)
    t = np.clip((r - a) / (b - a), 0.0, 1.0)
    s = t ** 4 * (35 - 84 * t + 70 * t ** 2 - 20 * t ** 3)
    ds = 140 * t ** 3 * (1 - t) ** 3
    dds = 420 * t ** 2 * (1 - t) ** 2 * (1 - 2 * t)
    return 1.0 - s, -ds / (b - a), -dds / (b - a) ** 2


@dataclass
class QuasimodeBound:
    k: float
    ell: int
    residual: float  # ||(P - k^2) u|| with ||u|| = 1, discrete operator
    residual_analytic: float  # same, from the cutoff-derivative formula
    flat_mismatch: float  # largest |discrete - analytic| where the cutoff is flat
    lower_bound: float
    vacuous: bool
    capped: bool
    cutoff: tuple  # (inner, outer) radius of the cutoff ramp


def bound_from_residual(residual, cap=BOUND_CAP):
    """``1/residual`` for a unit quasimode, capped; returns ``(bound, capped)``."""
    if not np.isfinite(residual):
        raise NumericalFailure("non-finite quasimode residual")
    if residual <= 1.0 / cap:
        return cap, True
    return 1.0 / residual, False


def cutoff_ramp(a, r_chi, flat_fraction=0.5):
    """Radii ``(r0, r1)`` of the quasimode cutoff ramp.

    The cutoff is 1 up to ``r0`` and 0 from ``r1 = (a + r_chi)/2`` on; the ramp
    occupies the outer ``1 - flat_fraction`` of ``[a, r1]``, where trapped
    modes have already decayed.
    """
    r1 = 0.5 * (a + r_chi)
    return a + flat_fraction * (r1 - a), r1


def quasimode_lower_bound(spec, resonance, r_chi=2.0, grid=None, ell=None, im_max=1e-3,
                          flat_fraction=0.5):
    """Lower bound for the cut-off resolvent norm at ``Re k`` from a quasimode.

    The quasimode is the regular modal solution at ``k = Re k_res`` times a
    degree-7 spline cutoff that is 1 on the scatterer and 0 beyond
    ``(a + r_chi)/2`` (see :func:`cutoff_ramp`).  ``resonance`` is a
    :class:`Resonance` or a complex number (then give ``ell``).
    """
    k_res = complex(getattr(resonance, "k", resonance))
    if ell is None:
        ell = getattr(resonance, "ell", None)
        if ell is None:
            raise ConfigError("mode index needed for a bare complex resonance")
    if spec.radius is None:
        raise NotApplicableError("free space has no resonances to certify")
    a = spec.radius
    if not r_chi > a:
        raise ConfigError("r_chi must exceed the scatterer radius")
    r0, b = cutoff_ramp(a, r_chi, flat_fraction)
    k = k_res.real
    if grid is None:
        grid = radial_grid(spec, k, r_chi)
    r = grid.r
    chi, dchi, ddchi = smooth_cutoff(r, r0, b)
    p, dp = regular_profile(spec, k, ell, r)
    w = grid.weights
    scale = math.sqrt(float(np.sum(w * np.abs(p * chi) ** 2)))
    if scale == 0:
        raise NumericalFailure("quasimode vanishes on the grid")
    u = p * chi / scale
    f = apply_operator(spec, k, u, ell, grid)
    dim = spec.dimension
    with np.errstate(divide="ignore", invalid="ignore"):
        fa = -(ddchi * p + 2 * dchi * dp + (dim - 1) * dchi * p / r) / scale
    fa[dchi == 0] = 0.0
    # rows whose stencil lies entirely where chi == 1
    flat = np.zeros(r.size, dtype=bool)
    one = chi == 1.0
    flat[1:-1] = one[:-2] & one[1:-1] & one[2:]
    mismatch = float(np.max(np.abs(f[flat] - fa[flat]))) if flat.any() else 0.0
    res = math.sqrt(float(np.sum(w * np.abs(f) ** 2)))
    res_a = math.sqrt(float(np.sum(w * np.abs(fa) ** 2)))
    bound, capped = bound_from_residual(res)
    return QuasimodeBound(k=k, ell=int(ell), residual=res, residual_analytic=res_a,
                          flat_mismatch=mismatch, lower_bound=bound,
                          vacuous=abs(k_res.imag) > im_max, capped=capped, cutoff=(r0, b))
