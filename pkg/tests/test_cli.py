import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from rydberg_dicke.cli import (
    load_waveform,
    main,
    result_from_dict,
    result_to_dict,
    waveform_from_dict,
    waveform_to_dict,
)
from rydberg_dicke.config import ConfigError, load_config, parse_config
from rydberg_dicke.grape import OptimizeOptions, Regime, optimize
from rydberg_dicke.hamiltonian import SystemParams, dressed_target
from rydberg_dicke.hilbert import dicke_state
from rydberg_dicke.propagation import ControlWaveform

SMALL = {
    "n_atoms": 3,
    "params_mhz": {"omega_r": 5.0, "delta_r": 2.5, "omega_uw": 2.5, "delta_uw": 1.25},
    "target": {"kind": "cat"},
    "optimize": {"steps": 10, "total_time_us": 1.5, "restarts": 3, "max_iterations": 300},
    "seed": 3,
}


def write_config(tmp_path, doc, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


def run(tmp_path, command, doc, *extra):
    cfg = write_config(tmp_path, doc)
    out = tmp_path / f"{command}.out"
    code = main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


# --- config -----------------------------------------------------------------

def test_parse_config_converts_units():
    cfg = parse_config(SMALL)
    assert cfg.params.omega_r == pytest.approx(2 * np.pi * 5)
    assert cfg.options.dt == pytest.approx(0.15)
    assert cfg.options.seed == 3 and cfg.regime is Regime.FULL_HILBERT
    np.testing.assert_allclose(cfg.target.coefficients(3), [2**-0.5, 0, 0, 2**-0.5])


@pytest.mark.parametrize(
    "patch, key",
    [
        ({"bogus": 1}, "bogus"),
        ({"params_mhz": {"omega_r": 5, "delta_r": 1, "omega_mw": 1}}, "params_mhz.omega_mw"),
        ({"optimize": {"steps": 4, "dt_us": 0.1, "iters": 3}}, "optimize.iters"),
        ({"target": {"kind": "cat", "angle": 1}}, "target.angle"),
        ({"target": {"kind": "squeezed"}}, "target.kind"),
        ({"regime": "magic"}, "regime"),
        ({"optimize": {"steps": 4}}, "optimize"),
        ({"optimize": {"steps": 4, "dt_us": 0.1, "total_time_us": 1}}, "optimize"),
        ({"n_atoms": 0}, "n_atoms"),
        ({"verify": {"oracle": 3}}, "verify.oracle"),
    ],
)
def test_config_errors_name_the_key(patch, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        parse_config({**SMALL, **patch})


def test_dressed_ground_defaults_to_2n_steps():
    cfg = parse_config({**SMALL, "regime": "dressed_ground", "optimize": {"dt_us": 1.0}})
    assert cfg.options.steps == 6


def test_load_config_json_and_yaml(tmp_path):
    a = load_config(write_config(tmp_path, SMALL))
    path = tmp_path / "run.json"
    path.write_text(json.dumps(SMALL))
    b = load_config(path)
    assert a.params == b.params and a.options == b.options
    bad = tmp_path / "bad.yaml"
    bad.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_coefficient_targets_are_normalized():
    cfg = parse_config({**SMALL, "target": {"kind": "coefficients", "values": [1, 0, [0, 1], 0]}})
    np.testing.assert_allclose(cfg.target.coefficients(3), np.r_[1, 0, 1j, 0] / np.sqrt(2))
    with pytest.raises(ConfigError):
        cfg.target.coefficients(4)


# --- serialization ---------------------------------------------------------

def test_waveform_round_trip():
    p = SystemParams.from_mhz(3, 5, 2.5, 2.5, 1.25)
    w = ControlWaveform(np.random.default_rng(0).uniform(-3, 3, 7), 0.0123456789)
    doc = json.loads(json.dumps(waveform_to_dict(w, p, Regime.DRESSED_GROUND)))
    w2, p2, regime = waveform_from_dict(doc)
    np.testing.assert_array_equal(w2.phases, w.phases)
    assert w2.dt == w.dt and regime is Regime.DRESSED_GROUND
    np.testing.assert_allclose(p2.omega_r, p.omega_r, rtol=1e-15)


def test_result_round_trip_is_lossless():
    p = SystemParams.from_mhz(2, 5, 2.5, 2.5, 1.25)
    target = dressed_target(p, np.r_[1, 0, 1] / np.sqrt(2))
    res = optimize(p, dicke_state(2, 0), target, OptimizeOptions(steps=6, dt=0.1, restarts=2, seed=1))
    back = result_from_dict(json.loads(json.dumps(result_to_dict(res, p, 0.1))))
    np.testing.assert_array_equal(back.best_waveform.phases, res.best_waveform.phases)
    assert back.best_fidelity == res.best_fidelity
    np.testing.assert_array_equal(back.fidelity_per_restart, res.fidelity_per_restart)
    for a, b in zip(back.restarts, res.restarts):
        np.testing.assert_array_equal(a.trace, b.trace)


# --- commands ----------------------------------------------------------------

def test_optimize_writes_result(tmp_path, capsys):
    code, out = run(tmp_path, "optimize", {**SMALL, "optimize": {**SMALL["optimize"], "fidelity_goal": 0.98}})
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["best_fidelity"] >= 0.98 and doc["converged"]
    assert len(doc["waveform"]["phases_rad"]) == 10
    pops = np.array(doc["dressed_populations"])
    assert pops.shape == (11, 7)
    np.testing.assert_allclose(pops.sum(axis=1), 1, atol=1e-12)
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["command"] == "optimize"


def test_optimize_below_goal_exits_2(tmp_path):
    doc = {**SMALL, "optimize": {"steps": 2, "total_time_us": 0.01, "restarts": 1}}
    code, out = run(tmp_path, "optimize", doc)
    assert code == 2
    assert not json.loads(out.read_text())["converged"]


def test_optimize_trivial_target(tmp_path):
    code, out = run(tmp_path, "optimize", {**SMALL, "target": {"kind": "dicke", "n": 0}})
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["best_fidelity"] == pytest.approx(1) and doc["iterations_used"] == [0]
    assert doc["waveform"]["phases_rad"] == []


def test_bad_config_exits_1(tmp_path):
    code, out = run(tmp_path, "optimize", {**SMALL, "whatever": 2})
    assert code == 1 and not out.exists()


def test_seed_override_changes_run(tmp_path):
    _, a = run(tmp_path, "optimize", {**SMALL, "optimize": {**SMALL["optimize"], "stop_at_goal": False}})
    first = json.loads(a.read_text())
    cfg = write_config(tmp_path, {**SMALL, "optimize": {**SMALL["optimize"], "stop_at_goal": False}})
    out = tmp_path / "b.json"
    main(["optimize", "--config", str(cfg), "--out", str(out), "--seed", "99"])
    second = json.loads(out.read_text())
    assert second["seed"] == 99
    assert first["restarts"][0]["initial_phases"] != second["restarts"][0]["initial_phases"]


SWEEP = {
    **SMALL,
    "optimize": {"steps": 6, "restarts": 2, "max_iterations": 100},
    "sweep": {"delta_r_mhz": [2.5, 5.0], "total_time_us": [0.3, 0.6], "delta_uw_ratio": 0.5},
}


def test_sweep_csv_is_reproducible(tmp_path):
    code, out = run(tmp_path, "sweep", SWEEP)
    assert code == 0
    first = out.read_bytes()
    lines = first.decode().strip().splitlines()
    assert lines[0] == "delta_r_mhz\\T_us,0.3,0.6"
    assert [line.split(",")[0] for line in lines[1:]] == ["2.5", "5.0"]
    sidecar = json.loads((tmp_path / "sweep.out.json").read_text())
    assert np.array(sidecar["fidelity"]).shape == (2, 2)
    code, out = run(tmp_path, "sweep", SWEEP)
    assert out.read_bytes() == first


def test_sweep_single_cell(tmp_path):
    doc = {**SWEEP, "sweep": {"delta_r_mhz": 2.5, "total_time_us": 0.6}}
    code, out = run(tmp_path, "sweep", doc)
    assert code == 0
    assert len(out.read_text().strip().splitlines()) == 2


def test_verify_small_system(tmp_path):
    code, out = run(tmp_path, "verify", {**SMALL, "n_atoms": 2, "verify": {"oracle_waveforms": 5}})
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["checks"]["closure"]["dimension_found"] == 24
    assert doc["checks"]["oracle"]["worst_infidelity"] < 1e-8


def test_verify_expected_uncontrollable(tmp_path):
    doc = {**SMALL, "n_atoms": 2, "params_mhz": {"omega_r": 0, "delta_r": 2.5, "omega_uw": 2.5}}
    code, _ = run(tmp_path, "verify", doc)
    assert code == 2
    code, out = run(tmp_path, "verify", {**doc, "verify": {"expected_uncontrollable": True}})
    assert code == 0
    assert "expected" in json.loads(out.read_text())["summary"]


def test_verify_skips_oracle_for_large_n(tmp_path):
    code, out = run(tmp_path, "verify", {**SMALL, "n_atoms": 5})
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["checks"]["closure"]["dimension_found"] == 120
    assert "skipped" in doc["checks"]["oracle"]


def test_simulate_replays_optimize(tmp_path):
    code, result = run(tmp_path, "optimize", SMALL)
    best = json.loads(result.read_text())["best_fidelity"]
    wf, params, _ = load_waveform(result)
    assert wf.steps == 10
    code, out = run(tmp_path, "simulate", {**SMALL, "simulate": {"snapshots": [0, 5]}}, "--waveform", str(result))
    assert code == 0
    doc = json.loads(out.read_text())
    assert abs(doc["final_fidelity"] - best) < 1e-12
    assert [s["step"] for s in doc["snapshots"]] == [0, 5]
    assert doc["final"]["step"] == 10


def test_simulate_snapshot_options(tmp_path):
    wf = tmp_path / "wf.json"
    p = SystemParams.from_mhz(7, 5, 2.5, 12.5, 1.25)
    wf.write_text(json.dumps(waveform_to_dict(ControlWaveform([0.1, 0.2, 0.3], 0.05), p, Regime.FULL_HILBERT)))
    doc = {**SMALL, "n_atoms": 7, "params_mhz": p.to_mhz()}
    code, out = run(tmp_path, "simulate", {**doc, "simulate": {"waveform": str(wf), "snapshots": []}})
    assert code == 0
    res = json.loads(out.read_text())
    assert res["snapshots"] == []
    rho = np.array(res["final"]["dressed_density_real"])
    assert rho.shape == (15, 15)
    assert np.trace(rho) == pytest.approx(1, abs=1e-12)
    code, out = run(tmp_path, "simulate", {**doc, "simulate": {"waveform": str(wf)}})
    assert len(json.loads(out.read_text())["snapshots"]) == 4
    # atom-number mismatch is an error
    code, _ = run(tmp_path, "simulate", {**SMALL, "simulate": {"waveform": str(wf)}})
    assert code == 1


CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.output
    if cfg.regime is Regime.DRESSED_GROUND:
        assert cfg.options.steps == 2 * cfg.n_atoms
