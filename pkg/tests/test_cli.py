import csv
import json

import numpy as np
import pytest

from trapped_wave.cli import LAYER_COLUMNS, SWEEP_COLUMNS, RunConfig, main
from trapped_wave import ConfigError, NumericalFailure, TruncationError, cli


def run(tmp_path, command, cfg, name="out"):
    p = tmp_path / f"{name}.json"
    p.write_text(json.dumps(cfg))
    out = tmp_path / name
    return main([command, "--config", str(p), "--out", str(out)]), out


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_unknown_key_is_config_error(tmp_path):
    code, _ = run(tmp_path, "sweep", {"scatterer": {"kind": "free"}, "bogus": 1})
    assert code == 2


@pytest.mark.parametrize("cfg", [
    {"k_range": [5, 2]},
    {"step": 0},
    {"seed": 1.5},
    {"scatterer": {"kind": "dirichlet", "radius": 1}, "sweep": {"r_chi": 0.5}},
    {"scatterer": {"kind": "penetrable", "radius": 1, "contrast": -1, "alpha": 1}},
    {"exclusion": {"k0": 5, "delta": 1}, "k_range": [2, 10]},
    {"layer": {"shape": "square"}},
])
def test_invalid_configs(cfg):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(cfg)


def test_missing_config_file(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_free_sweep_slope(tmp_path):
    code, out = run(tmp_path, "sweep", {"scatterer": {"kind": "free"}, "k_range": [2, 64],
                                        "step": 1.0})
    assert code == 0
    rows = read_csv(out / "sweep.csv")
    assert rows[0] == SWEEP_COLUMNS
    assert len(rows) == 64
    assert all(r[4] == "0.0" for r in rows[1:])
    rep = json.loads((out / "sweep_report.json").read_text())
    assert -1.15 <= rep["fitted_slope"] <= -0.85


def test_envelope_violation_exit_code(tmp_path):
    (tmp_path / "empty.jsonl").write_text("")
    cfg = {"scatterer": {"kind": "dirichlet", "radius": 1.0}, "k_range": [5, 40], "step": 0.5,
           "exclusion": {"k0": 5, "delta": 1, "rho": 9},
           "catalog": str(tmp_path / "empty.jsonl")}
    code, out = run(tmp_path, "sweep", cfg)
    assert code == 4
    rep = json.loads((out / "sweep_report.json").read_text())
    assert rep["passed"] is False and rep["predicted_exponent"] == pytest.approx(-1.0)


def test_out_of_range_parameter_exit_code(tmp_path):
    cfg = {"scatterer": {"kind": "dirichlet", "radius": 1.0}, "k_range": [30, 31], "step": 1,
           "sweep": {"l_max": 2}}
    assert run(tmp_path, "sweep", cfg)[0] == 2


@pytest.mark.parametrize("exc", [TruncationError, NumericalFailure])
def test_numerical_failure_exit_code(tmp_path, monkeypatch, exc):
    def fail(*args, **kwargs):
        raise exc("synthetic")
    monkeypatch.setattr(cli, "resolvent_norm", fail)
    cfg = {"scatterer": {"kind": "dirichlet", "radius": 1.0}, "k_range": [3, 4], "step": 1,
           "sweep": {"include_resonances": False}}
    assert run(tmp_path, "sweep", cfg)[0] == 3


def test_resonance_and_certify_commands(tmp_path):
    cfg = {"scatterer": {"kind": "penetrable", "radius": 1, "contrast": 0.5, "alpha": 1},
           "k_range": [2, 12], "step": 0.5, "resonances": {"strip_depth": 1.0, "ell_max": 14},
           "certify": {"top_n": 2}}
    code, out = run(tmp_path, "resonances", cfg)
    assert code == 0
    summary = json.loads((out / "catalog_summary.json").read_text())
    lines = (out / "catalog.jsonl").read_text().splitlines()
    assert summary["count"] == len(lines) > 0
    assert summary["nearest_to_axis"]["im"] < 0
    assert main(["certify", "--config", str(tmp_path / "out.json"), "--out", str(out)]) == 0
    certs = json.loads((out / "certificates.json").read_text())["certificates"]
    assert len(certs) == 2


def test_exclusion_command_requires_section(tmp_path):
    code, _ = run(tmp_path, "exclusion", {"scatterer": {"kind": "free"}})
    assert code == 2


def test_layer_sweep_outputs(tmp_path):
    cfg = {"k_range": [2, 3], "step": 0.25, "layer": {"curve": "circle", "n_per": 128}}
    code, out = run(tmp_path, "layer-sweep", cfg)
    assert code == 0
    rows = read_csv(out / "layer_sweep.csv")
    assert rows[0] == LAYER_COLUMNS and len(rows) == 6
    s = json.loads((out / "layer_summary.json").read_text())
    assert s["spikes"] == 0 and s["max_rel_diff_A_Aprime"] < 0.01


def test_layer_sweep_under_resolved(tmp_path):
    cfg = {"k_range": [2, 30], "step": 1, "layer": {"curve": "circle", "n_per": 64}}
    assert run(tmp_path, "layer-sweep", cfg)[0] == 2


def test_repeat_runs_are_byte_identical(tmp_path):
    cfg = {"scatterer": {"kind": "dirichlet", "radius": 1.0}, "k_range": [2, 8], "step": 0.5,
           "seed": 3}
    _, a = run(tmp_path, "sweep", cfg, "a")
    _, b = run(tmp_path, "sweep", cfg, "b")
    for name in ("sweep.csv", "sweep_report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_threads_env_does_not_change_output(tmp_path, monkeypatch):
    cfg = {"scatterer": {"kind": "dirichlet", "radius": 1.0}, "k_range": [2, 6], "step": 0.5}
    _, a = run(tmp_path, "sweep", cfg, "a")
    monkeypatch.setenv("TRAPPED_WAVE_THREADS", "3")
    _, b = run(tmp_path, "sweep", cfg, "b")
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    assert np.isfinite(float(read_csv(a / "sweep.csv")[1][1]))
