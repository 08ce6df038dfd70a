"""Complex zeros of modal determinants: counting, refinement and cataloging.

Zeros are counted by the argument principle (phase increments of the
log-determinant around a rectangle), isolated by recursive subdivision and
polished by Newton's method.  Resonances whose imaginary part is below what
double precision resolves directly are refined on the real axis instead:
for real ``k`` the determinant splits as ``D = D_J + i D_Y`` with both parts
real, ``D_Y`` has a real root ``k0`` and ``Im k_res = D_J(k0) / D_Y'(k0)``
to first order, with ``D_J`` (``h`` replaced by ``j``) evaluated without
cancellation.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import special_functions as sf
from .errors import ContourError, NotApplicableError
from .modal import _pair, _scaled_pair, determinant_and_derivative, log_modal_determinant
from .scatterers import Kind, ScattererSpec, multiplicity

__all__ = [
    "Box",
    "Resonance",
    "ResonanceCatalog",
    "check_asymptotics",
    "count_in_box",
    "counting_function",
    "find_resonances",
    "refine_root",
]

_NEWTON_TOL = 1e-10
_CLUSTER_FLOOR = 1e-8
_NEAR_REAL = 1e-7  # relative |Im k| below which the real-axis refinement is used


@dataclass(frozen=True)
class Box:
    """Closed rectangle ``[re0, re1] x [im0, im1]`` in the complex k-plane."""

    re0: float
    re1: float
    im0: float
    im1: float

    def __post_init__(self):
        if not (self.re1 > self.re0 and self.im1 > self.im0):
            raise ValueError("degenerate box")

    @property
    def width(self):
        return self.re1 - self.re0

    @property
    def height(self):
        return self.im1 - self.im0

    @property
    def center(self):
        return complex(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))

    def contains(self, k):
        return self.re0 <= k.real <= self.re1 and self.im0 <= k.imag <= self.im1

    def shifted(self, eps):
        return Box(self.re0 - eps, self.re1 + eps, self.im0 - eps, self.im1 + eps)

    def split(self):
        # off-centre cut so cut lines rarely pass through zeros on symmetric grids
        t = 0.5 + 0.0123
        if self.width >= self.height:
            m = self.re0 + t * self.width
            return Box(self.re0, m, self.im0, self.im1), Box(m, self.re1, self.im0, self.im1)
        m = self.im0 + t * self.height
        return Box(self.re0, self.re1, self.im0, m), Box(self.re0, self.re1, m, self.im1)


@dataclass(frozen=True)
class Resonance:
    k: complex
    ell: int
    multiplicity: int
    residual: float
    newton_iterations: int = 0
    cluster_count: int = 1

    def __post_init__(self):
        if not self.k.imag < 0:
            raise ValueError("a resonance must lie strictly below the real axis")

    def to_dict(self):
        return {"re": self.k.real, "im": self.k.imag, "ell": self.ell,
                "multiplicity": self.multiplicity, "residual": self.residual}


@dataclass
class ResonanceCatalog:
    spec: ScattererSpec
    strip_depth: float
    k_max: float
    entries: list = field(default_factory=list)
    clusters: list = field(default_factory=list)  # (Box, ell, count)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def weighted_count(self):
        return sum(e.multiplicity for e in self.entries)

    def nearest_to_axis(self):
        if not self.entries:
            return None
        return max(self.entries, key=lambda e: e.k.imag)

    def to_jsonl(self):
        return "".join(json.dumps(e.to_dict()) + "\n" for e in self.entries)

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text, spec, strip_depth=float("nan"), k_max=float("nan")):
        entries = []
        for line in text.splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            entries.append(Resonance(k=complex(d["re"], d["im"]), ell=int(d["ell"]),
                                     multiplicity=int(d["multiplicity"]),
                                     residual=float(d["residual"])))
        return cls(spec=spec, strip_depth=strip_depth, k_max=k_max, entries=entries)


# ---------------------------------------------------------------------------
# argument principle


def _corners(box):
    return [complex(box.re0, box.im0), complex(box.re1, box.im0),
            complex(box.re1, box.im1), complex(box.re0, box.im1)]


def _edge_points(box, n):
    t = np.arange(n) / n
    c = _corners(box)
    return np.concatenate([c[i] + (c[(i + 1) % 4] - c[i]) * t for i in range(4)])


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def _winding(spec, ell, box, n0=256, max_points=1 << 16, max_step=np.pi / 6):
    """Winding number of D_l along the box boundary, or None if unresolved.

    Starts from ``n0`` points per edge and bisects only the boundary
    intervals across which the phase moves by more than ``max_step``.
    """
    t = np.arange(4 * n0 + 1) / n0  # boundary parameter, 0..4
    c = _corners(box)

    def where(tt):
        i = np.minimum(tt.astype(int), 3)
        f = tt - i
        a = np.array(c)[i]
        b = np.array(c)[(i + 1) % 4]
        return a + (b - a) * f

    phase = log_modal_determinant(spec, ell, where(t[:-1])).imag
    phase = np.append(phase, phase[0])
    if not np.all(np.isfinite(phase)):
        return None
    # the pole of order <= l + 2 at k = 0 turns the phase at rate (l + 2)/|k|;
    # steps longer than that allows could alias by whole turns undetected
    rate = ell + 2.0
    while True:
        dphi = _wrap(np.diff(phase))
        z = where(t)
        seg = np.abs(np.diff(z)) * rate / np.minimum(np.abs(z[:-1]), np.abs(z[1:]))
        bad = np.flatnonzero((np.abs(dphi) > max_step) | (seg > max_step))
        if bad.size == 0:
            break
        if t.size + bad.size > max_points or np.min(np.diff(t)[bad]) < 1e-12:
            return None
        tm = 0.5 * (t[bad] + t[bad + 1])
        pm = log_modal_determinant(spec, ell, where(tm)).imag
        if not np.all(np.isfinite(pm)):
            return None
        t = np.insert(t, bad + 1, tm)
        phase = np.insert(phase, bad + 1, pm)
    count = _wrap(np.diff(phase)).sum() / (2 * np.pi)
    if abs(count - round(count)) > 0.05:
        return None
    return int(round(count))


def count_in_box(spec, ell, box, retries=3):
    """Number of zeros of ``D_l`` inside ``box`` (argument principle).

    The boundary is perturbed outward by ``1e-6`` and recounted when the
    phase cannot be resolved; ``ContourError`` after ``retries`` attempts.
    """
    if ell < 0:
        raise ValueError("ell must be non-negative")
    if spec.kind is Kind.FREE and spec.dimension == 3:
        pass  # still counted: the determinant is -i/k, zero-free
    b = box
    for attempt in range(retries + 1):
        if not (b.re0 <= 0 <= b.re1 and b.im0 <= 0 <= b.im1):
            w = _winding(spec, ell, b)
            if w is not None:
                if w < 0:
                    raise ContourError("negative winding: box encloses a pole of D_l")
                return w
        b = b.shifted(1e-6 * (attempt + 1))
    raise ContourError("winding number could not be resolved on this contour")


# ---------------------------------------------------------------------------
# refinement


def _newton(spec, ell, k, box=None, max_iter=60):
    for it in range(1, max_iter + 1):
        _, d, dp = determinant_and_derivative(spec, ell, np.array([k]))
        if dp[0] == 0 or not np.isfinite(dp[0]):
            return None, it
        step = d[0] / dp[0]
        k = k - step
        if not np.isfinite(k):
            return None, it
        if box is not None and not box.shifted(0.25 * max(box.width, box.height)).contains(k):
            return None, it
        if abs(step) <= _NEWTON_TOL * max(1.0, abs(k)) * 1e-2 or abs(step) <= _NEWTON_TOL:
            return k, it
    return None, max_iter


def _regular_part(spec, ell, k):
    """``(log_scale, d)`` for the determinant with ``h`` replaced by ``j``."""
    dim = spec.dimension
    a = spec.reference_radius
    k = np.asarray(k, dtype=complex)
    zo = k * a
    ljo, _ = _pair(dim, ell, zo)
    s, j, jp, _ = _scaled_pair(ljo, ell, zo, dim)
    if spec.kind is Kind.DIRICHLET:
        return s, j
    if spec.kind is Kind.NEUMANN:
        return s, jp
    if spec.kind is Kind.FREE:
        c, alpha = 1.0, 1.0
    else:
        c, alpha = spec.contrast, spec.alpha
    zi = zo / c
    lji, _ = _pair(dim, ell, zi)
    si, ji, jpi, _ = _scaled_pair(lji, ell, zi, dim)
    return s + si, (k / c) * jpi * j - alpha * k * ji * jp


def _refine_near_real(spec, ell, k, max_iter=60):
    """Real root of ``D_Y`` near ``Re k`` and first-order imaginary part."""
    x = float(k.real)
    for it in range(1, max_iter + 1):
        _, d, dp = determinant_and_derivative(spec, ell, np.array([x + 0j]))
        if dp[0].imag == 0:
            return None, it
        step = d[0].imag / dp[0].imag
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    s, d, dp = determinant_and_derivative(spec, ell, np.array([x + 0j]))
    sj, dj = _regular_part(spec, ell, np.array([x + 0j]))
    im = math.exp(float(sj[0] - s[0])) * dj[0].real / dp[0].imag
    return complex(x, im), it


def refine_root(spec, ell, k0, box=None):
    """Polish an approximate zero of ``D_l``; returns ``(k, iterations)`` or ``(None, n)``."""
    k, it = _newton(spec, ell, complex(k0), box)
    if k is None:
        return None, it
    if abs(k.imag) < _NEAR_REAL * max(1.0, abs(k)):
        kr, it2 = _refine_near_real(spec, ell, k)
        if kr is not None:
            return kr, it + it2
    return k, it


def _boundary_log_max(spec, ell, box, n=64):
    ld = log_modal_determinant(spec, ell, _edge_points(box, n))
    return float(np.max(ld.real))


def _residual(spec, ell, k, box):
    """|D_l(k)| relative to the largest |D_l| on the enclosing box boundary."""
    if abs(k.imag) < _NEAR_REAL * max(1.0, abs(k)):
        # |D| at a near-real zero is dominated by rounding of k itself; report
        # the first-order residual |D'| |k - k_ref| with k_ref the refined value.
        _, d, dp = determinant_and_derivative(spec, ell, np.array([k]))
        s, _, _ = determinant_and_derivative(spec, ell, np.array([complex(k.real, 0.0)]))
        lval = float(s[0]) + math.log(max(abs(dp[0]) * 1e-16 * abs(k), 1e-300))
    else:
        ld = log_modal_determinant(spec, ell, np.array([k]))
        lval = float(ld[0].real)
    return math.exp(min(lval - _boundary_log_max(spec, ell, box), 0.0))


def _isolate(spec, ell, box, count, out, clusters):
    stack = [(box, count)]
    while stack:
        b, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            k, it = refine_root(spec, ell, b.center, b)
            if k is not None and b.shifted(1e-9).contains(k):
                out.append((k, it, b))
                continue
            if max(b.width, b.height) < 1e-6:
                # Newton keeps leaving a tiny box: accept its centre
                out.append((b.center, it, b))
                continue
        if max(b.width, b.height) < _CLUSTER_FLOOR:
            clusters.append((b, ell, n))
            continue
        b1, b2 = b.split()
        n1 = count_in_box(spec, ell, b1)
        n2 = n - n1
        if n2 < 0:
            n2 = count_in_box(spec, ell, b2)
        stack.append((b2, n2))
        stack.append((b1, n1))


def _default_ell_max(spec, k_max):
    a = spec.reference_radius
    if spec.kind is Kind.PENETRABLE and spec.contrast < 1:
        return int(math.ceil(k_max * a / spec.contrast)) + 10
    return int(math.ceil(k_max * a)) + 10


def _thread_count():
    try:
        return max(1, int(os.environ.get("TRAPPED_WAVE_THREADS", "1")))
    except ValueError:
        return 1


def _mode_roots(spec, ell, region, chunk):
    """All roots of D_l in the region, searched chunk by chunk in Re k."""
    found, clusters = [], []
    edges = np.arange(region.re0, region.re1, chunk)
    edges = np.append(edges, region.re1)
    if edges[-1] - edges[-2] < 1e-3 * chunk and edges.size > 2:
        edges = np.delete(edges, -2)
    for lo, hi in zip(edges[:-1], edges[1:]):
        b = Box(float(lo), float(hi), region.im0, region.im1)
        n = count_in_box(spec, ell, b)
        _isolate(spec, ell, b, n, found, clusters)
    return found, clusters


def find_resonances(spec, k_max, strip_depth=3.0, ell_max=None, ell_min=0,
                    re_min=0.0, symmetric=False, chunk=4.0, workers=None):
    """Catalog the zeros of ``D_l`` for ``ell_min <= l <= ell_max``.

    The search region is ``re_min <= Re k <= k_max`` (or ``|Re k| <= k_max``
    when ``symmetric``) and ``-strip_depth / a <= Im k < 0``; its upper edge
    sits above the real axis so near-real resonances are enclosed.
    """
    if not 0 < strip_depth <= 5:
        raise ValueError("strip depth must lie in (0, 5]")
    if not 0 < k_max <= 200:
        raise ValueError("k_max must lie in (0, 200]")
    a = spec.reference_radius
    if ell_max is None:
        ell_max = _default_ell_max(spec, k_max)
    lo = -k_max if symmetric else re_min
    eta = 1.37e-3  # notch keeping every box away from k = 0
    im0 = -strip_depth / a
    if lo < eta:
        lo_edge = min(lo, -eta)
        pieces = [Box(lo_edge, k_max, im0, -eta), Box(eta, k_max, -eta, 0.1)]
        if lo < -eta:
            pieces.append(Box(lo, -eta, -eta, 0.1))
    else:
        pieces = [Box(lo, k_max, im0, 0.1)]
    cat = ResonanceCatalog(spec=spec, strip_depth=strip_depth, k_max=k_max)
    if spec.kind is Kind.FREE:
        return cat
    ells = list(range(ell_min, ell_max + 1))
    nthreads = workers or _thread_count()

    def job(ell):
        found, clusters = [], []
        for piece in pieces:
            f, cl = _mode_roots(spec, ell, piece, chunk)
            found += f
            clusters += cl
        res = []
        for k, it, b in found:
            if not k.imag < 0:
                continue
            res.append(Resonance(k=complex(k), ell=ell,
                                 multiplicity=multiplicity(spec.dimension, ell),
                                 residual=_residual(spec, ell, k, b), newton_iterations=it))
        return res, clusters

    if nthreads > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            results = list(ex.map(job, ells))
    else:
        results = [job(ell) for ell in ells]
    for res, clusters in results:
        cat.entries.extend(res)
        cat.clusters.extend(clusters)
    cat.entries = _dedupe(sorted(cat.entries, key=lambda e: (e.k.real, e.k.imag, e.ell)))
    return cat


def _dedupe(entries):
    out = []
    for e in entries:
        if out and out[-1].ell == e.ell and abs(out[-1].k - e.k) < 1e-8:
            continue
        out.append(e)
    return out


# ---------------------------------------------------------------------------
# asymptotics and counting


@dataclass(frozen=True)
class AsymptoticRow:
    nu: float
    index: int
    predicted: float  # predicted Re k
    matched: complex | None
    residual: float | None


def check_asymptotics(catalog, indices=(1,), nus=None):
    """Compare catalog real parts with ``c (nu + a_i (nu/2)^{1/3})``.

    Returns ``(rows, gaps)``; ``rows`` holds residuals
    ``(1/c) Re k - nu - a_i (nu/2)^{1/3}`` for the nearest entry of mode
    ``l = nu - 1/2``; ``gaps`` lists predictions with no entry of that mode.
    """
    spec = catalog.spec
    if spec.kind is not Kind.PENETRABLE:
        raise NotApplicableError("asymptotics apply to penetrable catalogs")
    c = spec.contrast
    a = spec.radius
    zeros = sf.airy_neg_zeros(max(indices))
    by_ell = {}
    for e in catalog.entries:
        by_ell.setdefault(e.ell, []).append(e.k)
    if nus is None:
        nus = [ell + 0.5 for ell in sorted(by_ell)]
    rows, gaps = [], []
    for nu in nus:
        ell = int(round(nu - 0.5))
        for i in indices:
            shift = nu + zeros[i - 1] * (nu / 2.0) ** (1.0 / 3.0)
            pred = c * shift / a
            ks = by_ell.get(ell)
            if not ks:
                gaps.append((nu, i))
                rows.append(AsymptoticRow(nu, i, pred, None, None))
                continue
            m = min(ks, key=lambda k: abs(k.real - pred))
            rows.append(AsymptoticRow(nu, i, pred, m, m.real * a / c - shift))
    return rows, gaps


def residual_slope(rows):
    """Least-squares slope of residual against nu (rows with a match only)."""
    pts = [(r.nu, r.residual) for r in rows if r.residual is not None]
    if len(pts) < 2:
        return float("nan")
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def counting_function(catalog, r):
    """Multiplicity-weighted number of catalog entries with ``|k| <= r``."""
    if r > catalog.k_max:
        warnings.warn("counting radius exceeds the catalog range; count is truncated",
                      stacklevel=2)
    return sum(e.multiplicity for e in catalog.entries if abs(e.k) <= r)
