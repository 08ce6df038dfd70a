"""Frequency exclusion sets around resonances.

For each semiclassical window the real frequency axis (in ``z = h^2 k^2``
coordinates) is cut into equal intervals; every interval whose complex band
contains a resonance is flagged, flagged runs are dilated, and the windows are
glued back together in ``k``.  Off the resulting set ``J`` the cut-off
resolvent obeys a polynomial bound; the interval width constant is chosen so
that ``|J| <= delta``.

Two window geometries are provided:

``thm33``
    dyadic windows ``k^2 in [2^l E, 2^{l+1} E)``, ``E = k0^2``, ``h = 2^{-l/2}``,
    window ``(E/2, 2E)``, band ``|Im z| <= 1``.
``thm34``
    unit windows ``k^2 in [lam, lam + 1)``, ``lam = k0^2 + j``,
    ``h = lam^{-1/2}``, window ``(1, 1 + h^2)``, band ``|Im z| <= h``.

Each flagged interval contributes its own width ``10 C_w h^m`` plus the
dilation ``6 C_w h^m`` to the measure, so ``C_w`` is calibrated with the
factor 16 rather than 6.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "ExclusionParams",
    "ExclusionSet",
    "ExponentPrediction",
    "Partition",
    "build_exclusion_set",
    "exponent_prediction",
    "flag_and_dilate",
    "window_partition",
]

_FLAG_AND_DILATE = 16.0  # 10 (flagged interval) + 2 * 3 (dilation), in units of C_w h^m


@dataclass(frozen=True)
class ExclusionParams:
    k0: float
    delta: float
    eps_tilde: float = 0.5
    n_sharp: int = 3
    c_sharp: float | None = None  # fitted from the catalog when None
    variant: str = "thm33"
    p: float | None = None
    rho: float = 0.0
    eta: float = 0.05  # slack in L = n# + eta (Thm34 metadata only)

    def __post_init__(self):
        v = str(self.variant).lower()
        object.__setattr__(self, "variant", v)
        if v not in ("thm33", "thm34"):
            raise ConfigError("variant must be 'thm33' or 'thm34'")
        if not self.k0 > 0:
            raise ConfigError("k0 must be positive")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if not self.eps_tilde > 0:
            raise ConfigError("eps_tilde must be positive")
        if self.n_sharp < 1:
            raise ConfigError("n_sharp must be a positive integer")
        if self.rho < 0:
            raise ConfigError("rho must be non-negative")
        if v == "thm34" and self.p is None:
            raise ConfigError("the thm34 variant needs p")
        if self.c_sharp is not None and not self.c_sharp > 0:
            raise ConfigError("c_sharp must be positive")

    @property
    def m(self):
        """Interval-width exponent.

        thm33: ``n# + 2 + eps - rho``.  thm34: ``p - rho + 4 + eps``, the
        smallest choice for which the per-window measures (in ``k^2``) sum.
        """
        if self.variant == "thm33":
            return self.n_sharp + 2 + self.eps_tilde - self.rho
        return self.p - self.rho + 4 + self.eps_tilde

    @property
    def count_exponent(self):
        """Exponent ``q`` in ``#distinct resonances per window <= C h^{-q}``."""
        if self.variant == "thm33":
            return self.n_sharp - self.rho
        return self.p - self.rho

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        allowed = set(cls.__dataclass_fields__)
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown exclusion parameters: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ExponentPrediction:
    variant: str
    exponent: float
    formula: str


def exponent_prediction(params, eps=None):
    """Predicted growth exponent of the cut-off resolvent off the exclusion set."""
    eps = params.eps_tilde if eps is None else eps
    n = params.n_sharp
    if params.variant == "thm33":
        return ExponentPrediction("thm33", 5 * n / 2 + eps - params.rho,
                                  "5 n#/2 + eps - rho")
    if params.p is None:
        raise ConfigError("the thm34 variant needs p")
    return ExponentPrediction("thm34", 3 * n / 2 + params.p + eps - params.rho,
                              "3 n#/2 + p + eps - rho")


# ---------------------------------------------------------------------------
# per-window geometry


@dataclass(frozen=True)
class Partition:
    """Contiguous intervals ``[lo + i w, lo + (i+1) w]`` covering ``(lo, hi)``.

    Stored implicitly because fine windows can hold billions of intervals.
    """

    lo: float
    hi: float
    width: float

    def __len__(self):
        return max(1, int(math.ceil((self.hi - self.lo) / self.width - 1e-12)))

    def __getitem__(self, i):
        n = len(self)
        if i < 0:
            i += n
        if not 0 <= i < n:
            raise IndexError(i)
        # both ends from the same formula so neighbours share endpoints exactly
        return (self.lo + i * self.width, min(self.lo + (i + 1) * self.width, self.hi))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def index_of(self, x):
        """Index of the half-open interval ``[a, b)`` holding ``x`` (None outside)."""
        if not self.lo <= x < self.hi:
            return None
        return min(int((x - self.lo) // self.width), len(self) - 1)


def window_partition(E, h, C_w, m, window=None):
    """Partition of ``(E/2, 2E)`` (or ``window``) into intervals of width ``10 C_w h^m``."""
    if not 0 < h <= 1:
        raise ValueError("h must lie in (0, 1]")
    if not C_w > 0:
        raise ValueError("C_w must be positive")
    lo, hi = (E / 2.0, 2.0 * E) if window is None else window
    w = 10.0 * C_w * h**m
    if w >= hi - lo:
        return Partition(lo, hi, hi - lo)
    return Partition(lo, hi, w)


def flag_and_dilate(partition, z_res, band, dilation):
    """Flag partition intervals under resonances, merge runs, dilate, clip.

    ``z_res`` are resonances in window coordinates; an interval ``I`` is
    flagged when some ``z`` has ``Re z`` in ``I`` and ``|Im z| <= band``.
    Returns a sorted list of disjoint ``[a, b]``.
    """
    idx = set()
    for z in np.atleast_1d(np.asarray(z_res, dtype=complex)):
        if abs(z.imag) > band:
            continue
        i = partition.index_of(z.real)
        if i is not None:
            idx.add(i)
    if not idx:
        return []
    runs = []
    for i in sorted(idx):
        if runs and runs[-1][1] == i - 1:
            runs[-1][1] = i
        else:
            runs.append([i, i])
    out = []
    for i0, i1 in runs:
        a = partition[i0][0] - dilation
        b = partition[i1][1] + dilation
        a, b = max(a, partition.lo), min(b, partition.hi)
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(x) for x in out]


# ---------------------------------------------------------------------------
# the exclusion set


@dataclass
class ExclusionSet:
    """Closed, sorted, disjoint intervals in ``k``; endpoints belong to the set."""

    intervals: list
    tail_bound: float
    params: ExclusionParams
    k_max: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.intervals = [tuple(map(float, iv)) for iv in self.intervals]
        self._lo = [a for a, _ in self.intervals]

    @property
    def measure(self):
        return float(math.fsum(b - a for a, b in self.intervals))

    def contains(self, k):
        i = bisect.bisect_right(self._lo, k) - 1
        return i >= 0 and k <= self.intervals[i][1]

    def __contains__(self, k):
        return self.contains(k)

    def to_dict(self):
        return {"intervals": [list(iv) for iv in self.intervals], "measure": self.measure,
                "tail_bound": self.tail_bound, "params": self.params.to_dict(),
                "k_max": self.k_max, "metadata": self.metadata}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, d):
        return cls(intervals=d["intervals"], tail_bound=float(d["tail_bound"]),
                   params=ExclusionParams.from_dict(d["params"]), k_max=float(d["k_max"]),
                   metadata=d.get("metadata", {}))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def measure(J):
    return J.measure


def contains(J, k):
    return J.contains(k)


def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(x) for x in out]


def _resonance_ks(catalog):
    # distinct locations; conjugate-mirror poles at -conj(k) are not used
    return np.array(sorted({e.k for e in catalog.entries if e.k.real > 0},
                           key=lambda z: (z.real, z.imag)), dtype=complex)


def build_exclusion_set(catalog, params, k_max=None):
    """Exclusion set ``J`` in ``k`` from a resonance catalog.

    ``k_max`` defaults to the catalog range.  Windows lying fully below
    ``k_max`` are built exactly; the part of the frequency axis beyond
    ``k_max`` enters through ``tail_bound``, the analytic bound on the
    measure of the missing windows.
    """
    if k_max is None:
        k_max = catalog.k_max
    k_max = float(k_max)
    ks = _resonance_ks(catalog)
    k2 = ks**2
    if params.variant == "thm33":
        return _build_thm33(ks, k2, params, k_max, catalog)
    return _build_thm34(ks, k2, params, k_max, catalog)


def _build_thm33(ks, k2, params, k_max, catalog):
    E = params.k0**2
    m = params.m
    q = params.count_exponent
    if k_max <= params.k0:
        return _empty_with_full_tail(params, k_max)

    windows = []
    ell = 0
    while 2**ell * E < k_max**2:
        windows.append(ell)
        ell += 1
    counts = {}
    zs = {}
    for ell in windows:
        h2 = 2.0 ** (-ell)
        z = h2 * k2
        sel = (z.real > E / 2) & (z.real < 2 * E) & (np.abs(z.imag) <= 1.0)
        zs[ell] = z[sel]
        counts[ell] = int(sel.sum())
    c_sharp = params.c_sharp
    if c_sharp is None:
        # fitted density constant, floored at 1 so the tail bound stays conservative
        c_sharp = max([counts[l] * 2.0 ** (-l * q / 2) for l in windows] + [1.0])
    r = 2.0 ** (-params.eps_tilde / 2)
    delta_p = 2.0 * params.delta * params.k0
    C_w = delta_p * (1 - r) / (_FLAG_AND_DILATE * c_sharp)

    intervals = []
    per_window = []
    last_partial = None
    for ell in windows:
        h = 2.0 ** (-ell / 2)
        part = window_partition(E, h, C_w, m)
        dil = 3.0 * C_w * h**m
        jpp = flag_and_dilate(part, zs[ell], 1.0, dil)
        scale = 2.0**ell
        hi_k2 = min(2 * E * scale, k_max**2)
        for a, b in jpp:
            a, b = max(a, E), min(b, 2 * E)  # keep the part in [E, 2E)
            if b <= a:
                continue
            lo, up = a * scale, min(b * scale, hi_k2)
            if up > lo:
                intervals.append((math.sqrt(lo), math.sqrt(up)))
        bound = _FLAG_AND_DILATE * C_w * c_sharp * r**ell
        per_window.append({"ell": ell, "h": h, "count": counts[ell],
                           "flagged_runs": len(jpp), "bound_k2": bound})
        if 2 ** (ell + 1) * E > k_max**2:
            last_partial = ell
    # tail: windows beyond the catalog plus the uncovered remainder of a partial window
    first_missing = windows[-1] + 1
    tail_k2 = _FLAG_AND_DILATE * C_w * c_sharp * r**first_missing / (1 - r)
    if last_partial is not None:
        h = 2.0 ** (-last_partial / 2)
        known = counts[last_partial]
        remainder = max(c_sharp * h ** (-q) - known, 0.0)
        tail_k2 += 2.0**last_partial * _FLAG_AND_DILATE * C_w * h**m * remainder
    tail = tail_k2 / (2.0 * params.k0)
    meta = {"m": m, "C_w": C_w, "c_sharp": c_sharp, "delta_prime": delta_p,
            "windows": per_window, "band": 1.0,
            "catalog_depth": catalog.strip_depth,
            # deepest |Im k| reached by the band |Im z| <= 1 over the built windows
            "band_depth_needed": 2.0 ** (windows[-1] / 2) / (math.sqrt(2) * params.k0)}
    return ExclusionSet(_merge(intervals), tail, params, k_max, meta)


def _lambda_sum(lam0, s):
    """Upper bound for sum_{j>=0} (lam0 + j)^{-1-s}."""
    return lam0 ** (-1 - s) + lam0 ** (-s) / s


def _build_thm34(ks, k2, params, k_max, catalog):
    lam0 = params.k0**2
    m = params.m
    q = params.count_exponent
    if k_max <= params.k0:
        return _empty_with_full_tail(params, k_max)
    n_win = int(math.ceil(k_max**2 - lam0))
    order = np.argsort(k2.real)
    k2s = k2[order]
    re = k2s.real
    counts, zsel = [], []
    for j in range(n_win):
        lam = lam0 + j
        h = lam**-0.5
        i0 = np.searchsorted(re, lam, "left")
        i1 = np.searchsorted(re, lam + 1.0, "left")
        w = k2s[i0:i1]
        # u = z - 1 = (k^2 - lam) / lam keeps full precision near z = 1
        u = (w - lam) / lam
        sel = np.abs(u.imag) <= h
        zsel.append(u[sel])
        counts.append(int(sel.sum()))
    counts = np.array(counts)
    lams = lam0 + np.arange(n_win)
    c_sharp = params.c_sharp
    if c_sharp is None:
        c_sharp = max(float(np.max(counts * lams ** (-q / 2))) if n_win else 0.0, 1.0)
    s = params.eps_tilde / 2
    delta_p = 2.0 * params.delta * params.k0
    C_w = delta_p / (_FLAG_AND_DILATE * c_sharp * _lambda_sum(lam0, s))

    intervals = []
    L = params.n_sharp + params.eta
    c_small = C_w / math.sqrt(max(m, 1.0))
    worst = 0.0
    for j in range(n_win):
        lam = lam0 + j
        h = lam**-0.5
        part = window_partition(1.0, h, C_w, m, window=(0.0, h * h))
        dil = 3.0 * C_w * h**m
        jpp = flag_and_dilate(part, zsel[j], h, dil)
        for a, b in jpp:
            lo, up = lam + lam * a, min(lam + lam * b, k_max**2)
            if up > lo:
                intervals.append((math.sqrt(lo), math.sqrt(up)))
        # delta(h) = c h^{m + 3L/2} against the admissibility bound h^{1+L}/2
        worst = max(worst, c_small * h ** (m + 1.5 * L) / (0.5 * h ** (1 + L)))
    lam_end = lam0 + n_win
    tail_k2 = _FLAG_AND_DILATE * C_w * c_sharp * _lambda_sum(lam_end, s)
    if lam0 + n_win - 1 + 1 > k_max**2 and n_win:
        lam = lam0 + n_win - 1
        h = lam**-0.5
        remainder = max(c_sharp * h ** (-q) - counts[-1], 0.0)
        tail_k2 += _FLAG_AND_DILATE * C_w * h ** (m - 2) * remainder
    tail = tail_k2 / (2.0 * params.k0)
    meta = {"m": m, "C_w": C_w, "c_sharp": c_sharp, "delta_prime": delta_p,
            "delta_h_c": c_small, "delta_h_exponent": m + 1.5 * L,
            "delta_h_ratio_max": worst, "band": "h", "catalog_depth": catalog.strip_depth}
    if worst > 1.0:
        raise ConfigError("delta(h) violates the admissibility bound h^{1+L}/2")
    return ExclusionSet(_merge(intervals), tail, params, k_max, meta)


def _empty_with_full_tail(params, k_max):
    delta_p = 2.0 * params.delta * params.k0
    return ExclusionSet([], delta_p / (2.0 * params.k0), params, k_max,
                        {"note": "k_max below k0; all windows in the tail"})
