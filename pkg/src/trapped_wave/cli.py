"""Command-line entry point: ``trapped-wave <command> --config cfg.json --out dir``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 envelope above the predicted exponent on the complement of ``J``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import layer_operators as lo
from .bounds import fit_envelope
from .errors import ConfigError, ContourError, NotApplicableError, NumericalFailure, TruncationError
from .exclusion import ExclusionParams, build_exclusion_set, exponent_prediction
from .modal import resolvent_norm
from .quasimodes import certify
from .resonances import ResonanceCatalog, find_resonances
from .scatterers import Kind, ScattererSpec

EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ENVELOPE = 2, 3, 4
SWEEP_COLUMNS = ["k", "norm", "argmax_mode", "excluded", "wall_ms"]
LAYER_COLUMNS = ["k", "inv_norm_A", "inv_norm_Aprime", "spike_flag"]

_TOP_KEYS = {"scatterer", "k_range", "step", "exclusion", "sweep", "resonances",
             "layer", "certify", "seed", "timing", "catalog"}


@dataclass
class RunConfig:
    scatterer: ScattererSpec
    k_lo: float
    k_hi: float
    step: float
    exclusion: ExclusionParams | None = None
    r_chi: float = 2.0
    l_max: int | None = None
    n_r: int | None = None
    include_resonances: bool = True
    min_samples: int = 50
    res_k_max: float | None = None
    strip_depth: float = 3.0
    ell_max: int | None = None
    layer: dict = field(default_factory=dict)
    top_n: int = 5
    seed: int = 0
    timing: bool = False
    catalog: str | None = None

    @property
    def ks(self):
        n = int(math.floor((self.k_hi - self.k_lo) / self.step + 1e-9))
        return self.k_lo + self.step * np.arange(n + 1)

    @property
    def catalog_k_max(self):
        return self.res_k_max if self.res_k_max is not None else self.k_hi

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        spec = ScattererSpec.from_dict(d.get("scatterer", {"kind": "free"}))
        try:
            k_lo, k_hi = (float(x) for x in d.get("k_range", (2.0, 64.0)))
            step = float(d.get("step", 0.5))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad k range: {exc}") from exc
        if not 0 < k_lo < k_hi:
            raise ConfigError("need 0 < k_lo < k_hi")
        if not step > 0:
            raise ConfigError("step must be positive")
        excl = None
        if d.get("exclusion") is not None:
            excl = ExclusionParams.from_dict(dict(d["exclusion"]))
            if k_lo < excl.k0:
                raise ConfigError("k_lo must be at least k0")
        sw = _section(d, "sweep", {"r_chi", "l_max", "n_r", "include_resonances", "min_samples"})
        rs = _section(d, "resonances", {"k_max", "strip_depth", "ell_max"})
        ly = _section(d, "layer", {"curve", "radius", "gap", "n_per", "eta_factor", "ratio", "window"})
        ce = _section(d, "certify", {"top_n"})
        r_chi = float(sw.get("r_chi", 2.0))
        if spec.radius is not None and not r_chi > spec.radius:
            raise ConfigError("r_chi must exceed the scatterer radius")
        seed = d.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed must be an integer")
        return cls(scatterer=spec, k_lo=k_lo, k_hi=k_hi, step=step, exclusion=excl,
                   r_chi=r_chi, l_max=_opt_int(sw.get("l_max")), n_r=_opt_int(sw.get("n_r")),
                   include_resonances=bool(sw.get("include_resonances", True)),
                   min_samples=int(sw.get("min_samples", 50)),
                   res_k_max=None if rs.get("k_max") is None else float(rs["k_max"]),
                   strip_depth=float(rs.get("strip_depth", 3.0)),
                   ell_max=_opt_int(rs.get("ell_max")), layer=ly,
                   top_n=int(ce.get("top_n", 5)), seed=seed,
                   timing=bool(d.get("timing", False)), catalog=d.get("catalog"))

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc


def _section(d, name, allowed):
    s = d.get(name) or {}
    if not isinstance(s, dict):
        raise ConfigError(f"{name} must be an object")
    unknown = set(s) - allowed
    if unknown:
        raise ConfigError(f"unknown {name} keys: {sorted(unknown)}")
    return s


def _opt_int(v):
    return None if v is None else int(v)


def _threads():
    try:
        return max(1, int(os.environ.get("TRAPPED_WAVE_THREADS", "1")))
    except ValueError:
        return 1


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands


def _catalog(cfg, out):
    path = Path(cfg.catalog) if cfg.catalog else out / "catalog.jsonl"
    if cfg.catalog or path.exists():
        if not path.exists():
            raise ConfigError(f"catalog file {path} not found")
        return ResonanceCatalog.from_jsonl(path.read_text(), cfg.scatterer,
                                           strip_depth=cfg.strip_depth, k_max=cfg.catalog_k_max)
    return find_resonances(cfg.scatterer, cfg.catalog_k_max, strip_depth=cfg.strip_depth,
                           ell_max=cfg.ell_max, workers=_threads())


def _im_trend(catalog, width=5.0):
    """Largest Im k per Re-k bin of ``width``, and whether it is non-increasing in |Im|."""
    bins = {}
    for e in catalog.entries:
        if e.k.real <= 0:
            continue
        b = int(e.k.real // width)
        bins[b] = max(bins.get(b, -math.inf), e.k.imag)
    keys = sorted(bins)
    vals = [abs(bins[b]) for b in keys]
    mono = all(v2 <= v1 for v1, v2 in zip(vals, vals[1:]))
    return [[b * width, (b + 1) * width, bins[b]] for b in keys], mono


def cmd_resonances(cfg, out):
    cat = find_resonances(cfg.scatterer, cfg.catalog_k_max, strip_depth=cfg.strip_depth,
                          ell_max=cfg.ell_max, workers=_threads())
    cat.write_jsonl(out / "catalog.jsonl")
    near = cat.nearest_to_axis()
    trend, mono = _im_trend(cat)
    _write_json(out / "catalog_summary.json", {
        "scatterer": cfg.scatterer.to_dict(), "k_max": cat.k_max,
        "strip_depth": cat.strip_depth, "count": len(cat),
        "weighted_count": cat.weighted_count(),
        "nearest_to_axis": None if near is None else near.to_dict(),
        "im_trend": trend, "im_trend_monotone": mono,
        "unresolved_clusters": len(cat.clusters), "seed": cfg.seed,
    })
    return 0


def _exclusion(cfg, catalog):
    if cfg.exclusion is None:
        return None
    return build_exclusion_set(catalog, cfg.exclusion, k_max=max(cfg.k_hi, catalog.k_max))


def cmd_exclusion(cfg, out):
    if cfg.exclusion is None:
        raise ConfigError("the exclusion command needs an 'exclusion' section")
    J = _exclusion(cfg, _catalog(cfg, out))
    _write_json(out / "exclusion.json", J.to_dict())
    return 0


def _sweep_ks(cfg, catalog):
    ks = list(cfg.ks)
    if cfg.include_resonances and catalog is not None:
        ks += [e.k.real for e in catalog.entries
               if abs(e.k.imag) <= 1e-3 and cfg.k_lo <= e.k.real <= cfg.k_hi]
    return np.array(sorted(set(ks)))


def cmd_sweep(cfg, out):
    spec = cfg.scatterer
    catalog = None
    if cfg.exclusion is not None or (cfg.include_resonances and spec.kind is not Kind.FREE):
        catalog = _catalog(cfg, out)
    J = _exclusion(cfg, catalog) if catalog is not None else None
    ks = _sweep_ks(cfg, catalog)

    def one(k):
        t0 = time.perf_counter()
        est = resolvent_norm(spec, float(k), cfg.r_chi, l_max=cfg.l_max, n_r=cfg.n_r)
        ms = (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0
        excluded = bool(J is not None and J.contains(float(k)))
        return (float(k), est.norm, est.argmax_mode, excluded, ms)

    n = _threads()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            rows = list(ex.map(one, ks))
    else:
        rows = [one(k) for k in ks]
    _write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)

    pred = exponent_prediction(cfg.exclusion).exponent if cfg.exclusion is not None else None
    report = {"scatterer": spec.to_dict(), "samples": len(rows), "seed": cfg.seed,
              "measure_J": 0.0 if J is None else J.measure,
              "tail_bound": 0.0 if J is None else J.tail_bound,
              "predicted_exponent": pred}
    try:
        fit = fit_envelope([(r[0], r[1]) for r in rows], mask=J, predicted=pred,
                           min_samples=cfg.min_samples)
    except NotApplicableError as exc:
        report.update(fitted_slope=None, note=str(exc), passed=None)
        _write_json(out / "sweep_report.json", report)
        return 0
    passed = fit.within_prediction
    report.update(fitted_slope=fit.slope, intercept=fit.intercept,
                  max_residual=fit.max_residual, unmasked_samples=fit.n_used, passed=passed)
    _write_json(out / "sweep_report.json", report)
    return EXIT_ENVELOPE if passed is False else 0


def _curve(cfg):
    ly = cfg.layer
    kind = ly.get("curve", "circle")
    radius = float(ly.get("radius", 1.0))
    if kind == "circle":
        probe = lo.circle(radius, 8)
    elif kind == "two_circles":
        probe = lo.two_circles(radius, float(ly.get("gap", 1.0)), 8)
    else:
        raise ConfigError("layer curve must be 'circle' or 'two_circles'")
    comps = probe.centers.shape[0]
    n_per = ly.get("n_per")
    if n_per is None:
        need = probe.required_n(cfg.k_hi)
        n_per = int(math.ceil(need / comps))
        n_per += n_per % 2
    n_per = int(n_per)
    if kind == "circle":
        return lo.circle(radius, n_per)
    return lo.two_circles(radius, float(ly.get("gap", 1.0)), n_per)


def cmd_layer_sweep(cfg, out):
    curve = _curve(cfg)
    ly = cfg.layer
    rows = lo.spike_sweep(curve, cfg.ks, eta_factor=float(ly.get("eta_factor", 1.0)),
                          ratio=float(ly.get("ratio", 10.0)), window=int(ly.get("window", 25)))
    _write_csv(out / "layer_sweep.csv", LAYER_COLUMNS,
               [(r.k, r.inv_norm_A, r.inv_norm_Aprime, r.spike_flag) for r in rows])
    a = np.array([r.inv_norm_A for r in rows])
    b = np.array([r.inv_norm_Aprime for r in rows])
    summary = {"curve": curve.kind, "radius": curve.radius, "gap": curve.gap, "n": curve.n,
               "spikes": int(sum(r.spike_flag for r in rows)),
               "spike_spacing": lo.spike_spacing(rows),
               "max_rel_diff_A_Aprime": float(np.max(np.abs(a - b) / a)),
               "seed": cfg.seed}
    if curve.gap:
        summary["bouncing_ray_spacing"] = math.pi / curve.gap
    _write_json(out / "layer_summary.json", _finite(summary))
    return 0


def _finite(d):
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def cmd_certify(cfg, out):
    rep = certify(_catalog(cfg, out), cfg.scatterer, top_n=cfg.top_n, r_chi=cfg.r_chi)
    (out / "certificates.json").write_text(rep.to_json() + "\n")
    return 0


COMMANDS = {"resonances": cmd_resonances, "sweep": cmd_sweep, "layer-sweep": cmd_layer_sweep,
            "exclusion": cmd_exclusion, "certify": cmd_certify}


def main(argv=None):
    ap = argparse.ArgumentParser(prog="trapped-wave",
                                 description="Resolvent sweeps, resonances and exclusion sets.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", required=True, help="output directory")
    args = ap.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, TruncationError, ContourError, NotApplicableError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # remaining ValueErrors come from out-of-range user parameters
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
