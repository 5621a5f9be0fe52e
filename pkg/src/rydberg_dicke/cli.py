"""Command line front end: ``rydberg-dicke {optimize,sweep,verify,simulate}``.

Exit codes: 0 success, 2 optimizer finished below its fidelity goal (or a
verification check failed), 1 error.  Diagnostics go to stderr; stdout
carries at most one JSON summary line.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .grape import (
    Landscape,
    OptimizationResult,
    Regime,
    RestartRecord,
    optimize,
    optimize_dressed_ground,
    sweep_landscape,
)
from .hamiltonian import SystemParams, build_drift, dressed_basis, dressed_target
from .hilbert import collective_spin, dicke_state, fidelity, spin_coherent_state
from .propagation import ControlWaveform, PhaseProblem, evolve
from .verification import full_space_evolve, lie_closure_dimension

log = logging.getLogger("rydberg_dicke")

EXIT_OK, EXIT_ERROR, EXIT_BELOW_GOAL = 0, 1, 2

__all__ = [
    "main",
    "cmd_optimize",
    "cmd_sweep",
    "cmd_verify",
    "cmd_simulate",
    "waveform_to_dict",
    "waveform_from_dict",
    "load_waveform",
    "result_to_dict",
    "result_from_dict",
    "landscape_to_csv",
]


# --- serialization ---------------------------------------------------------

def _complex_pairs(amps):
    return [[float(a.real), float(a.imag)] for a in np.asarray(amps, dtype=complex)]


def write_atomic(path, text: str):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(doc) -> str:
    # json writes floats with repr, which round-trips float64 exactly
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def waveform_to_dict(waveform: ControlWaveform | None, params: SystemParams, regime: Regime, dt=None) -> dict:
    return {
        "n_atoms": params.n_atoms,
        "dt_us": float(waveform.dt if waveform is not None else dt),
        "phases_rad": [] if waveform is None else [float(p) for p in waveform.phases],
        "params_mhz": params.to_mhz(),
        "regime": regime.value,
    }


def waveform_from_dict(doc: dict) -> tuple[ControlWaveform, SystemParams, Regime]:
    params = SystemParams.from_mhz(doc["n_atoms"], **doc["params_mhz"])
    wf = ControlWaveform(doc["phases_rad"], doc["dt_us"])
    return wf, params, Regime(doc.get("regime", Regime.FULL_HILBERT.value))


def load_waveform(path) -> tuple[ControlWaveform, SystemParams, Regime]:
    doc = json.loads(Path(path).read_text())
    if "waveform" in doc:  # a full optimize result document
        doc = doc["waveform"]
    return waveform_from_dict(doc)


def result_to_dict(result: OptimizationResult, params: SystemParams, dt: float) -> dict:
    return {
        "waveform": waveform_to_dict(result.best_waveform, params, result.regime, dt),
        "best_fidelity": result.best_fidelity,
        "fidelity_per_restart": [float(f) for f in result.fidelity_per_restart],
        "iterations_used": [int(i) for i in result.iterations_used],
        "converged": result.converged,
        "regime": result.regime.value,
        "seed": result.seed,
        "peak_leakage": result.peak_leakage,
        "final_leakage": result.final_leakage,
        "restarts": [
            {
                "initial_phases": [float(x) for x in r.initial_phases],
                "phases": [float(x) for x in r.phases],
                "fidelity": r.fidelity,
                "iterations": r.iterations,
                "trace": [float(x) for x in r.trace],
                "message": r.message,
            }
            for r in result.restarts
        ],
    }


def result_from_dict(doc: dict) -> OptimizationResult:
    wdoc = doc["waveform"]
    waveform = ControlWaveform(wdoc["phases_rad"], wdoc["dt_us"]) if wdoc["phases_rad"] else None
    restarts = [
        RestartRecord(
            np.array(r["initial_phases"]),
            np.array(r["phases"]),
            r["fidelity"],
            r["iterations"],
            np.array(r["trace"]),
            r.get("message", ""),
        )
        for r in doc.get("restarts", [])
    ]
    return OptimizationResult(
        best_waveform=waveform,
        best_fidelity=doc["best_fidelity"],
        fidelity_per_restart=np.array(doc["fidelity_per_restart"]),
        iterations_used=np.array(doc["iterations_used"], dtype=int),
        converged=doc["converged"],
        regime=Regime(doc["regime"]),
        restarts=restarts,
        seed=doc.get("seed", 0),
        peak_leakage=doc.get("peak_leakage"),
        final_leakage=doc.get("final_leakage"),
    )


def landscape_to_csv(land: Landscape) -> str:
    """Rows are delta_r (MHz), columns are run times (us), cells best fidelity."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["delta_r_mhz\\T_us"] + [repr(float(t)) for t in land.times])
    for dr, row in zip(land.delta_r, land.fidelity):
        writer.writerow([repr(float(dr / (2 * np.pi)))] + [repr(float(v)) for v in row])
    return buf.getvalue()


# --- helpers ---------------------------------------------------------------

def _states(cfg: RunConfig):
    params = cfg.params
    basis = dressed_basis(params)
    target = dressed_target(params, cfg.target.coefficients(params.n_atoms), basis)
    if cfg.initial is None:
        psi0 = dicke_state(params.n_atoms, 0)
    else:
        psi0 = dressed_target(params, cfg.initial.coefficients(params.n_atoms), basis)
    return basis, psi0, target


def _step_populations(waveform, params, psi0, basis):
    """Dressed-basis populations after each phase step (row 0 = initial)."""
    if waveform is None:
        rows = np.array([psi0.amplitudes])
    else:
        rows = PhaseProblem(params, psi0).states(waveform.phases, waveform.dt)
    dressed = rows @ basis.transform.conj()
    return np.abs(dressed) ** 2


def _summary(doc):
    print(json.dumps(doc, allow_nan=True), file=sys.stdout)


# --- commands --------------------------------------------------------------

def cmd_optimize(cfg: RunConfig, out, threads: int = 1) -> int:
    params = cfg.params
    opts = cfg.options.replace(workers=threads)
    basis, psi0, target = _states(cfg)
    if cfg.regime is Regime.DRESSED_GROUND:
        result = optimize_dressed_ground(
            params,
            cfg.target.coefficients(params.n_atoms),
            opts,
            initial_coeffs=None if cfg.initial is None else cfg.initial.coefficients(params.n_atoms),
        )
    else:
        result = optimize(params, psi0, target, opts)

    doc = {"config": cfg.raw}
    doc.update(result_to_dict(result, params, opts.dt))
    pops = _step_populations(result.best_waveform, params, psi0, basis)
    doc["dressed_labels"] = [str(lab).replace("|", "|~", 1) for lab in basis.labels]
    doc["dressed_populations"] = pops.tolist()
    write_atomic(out, _dumps(doc))
    log.info("best fidelity %.10f over %d restart(s)", result.best_fidelity, len(result.fidelity_per_restart))
    if result.peak_leakage is not None:
        log.info("dressed-excited leakage: peak %.3e, final %.3e", result.peak_leakage, result.final_leakage)
    _summary({"command": "optimize", "best_fidelity": result.best_fidelity, "converged": result.converged, "out": str(out)})
    return EXIT_OK if result.converged else EXIT_BELOW_GOAL


def cmd_sweep(cfg: RunConfig, out, threads: int = 1) -> int:
    sw = cfg.sweep
    if "delta_r_mhz" not in sw or "total_time_us" not in sw:
        raise ConfigError("sweep needs 'sweep.delta_r_mhz' and 'sweep.total_time_us'")
    steps = int(sw.get("steps", cfg.options.steps))
    dr = 2 * np.pi * np.atleast_1d(np.asarray(sw["delta_r_mhz"], dtype=float))
    times = np.atleast_1d(np.asarray(sw["total_time_us"], dtype=float))
    land = sweep_landscape(
        cfg.params,
        cfg.target.coefficients(cfg.n_atoms),
        steps,
        dr,
        times,
        cfg.options.replace(workers=threads),
        delta_uw_ratio=sw.get("delta_uw_ratio"),
        initial_coeffs=None if cfg.initial is None else cfg.initial.coefficients(cfg.n_atoms),
    )
    out = Path(out)
    write_atomic(out, landscape_to_csv(land))
    sidecar = {
        "config": cfg.raw,
        "steps": steps,
        "delta_r_mhz": [float(x) for x in dr / (2 * np.pi)],
        "total_time_us": [float(t) for t in times],
        "fidelity": land.fidelity.tolist(),
        "iterations": land.iterations.tolist(),
        "restarts_used": land.restarts_used.tolist(),
        "cell_seeds": land.seeds.tolist(),
        "errors": {f"{i},{j}": msg for (i, j), msg in land.errors.items()},
        "restarts": cfg.options.restarts,
        "seed": cfg.seed,
    }
    write_atomic(out.with_suffix(out.suffix + ".json"), _dumps(sidecar))
    _summary({"command": "sweep", "cells": int(land.fidelity.size), "failed": int(land.failed.sum()), "out": str(out)})
    return EXIT_ERROR if land.failed.all() else EXIT_OK


def cmd_verify(cfg: RunConfig, out) -> int:
    params = cfg.params
    N = params.n_atoms
    vf = cfg.verify
    gens = [build_drift(params), collective_spin(N, "x"), collective_spin(N, "y")]
    report = lie_closure_dimension(gens, tol=float(vf.get("closure_tolerance", 1e-9)))
    expect_uncontrollable = bool(vf.get("expected_uncontrollable", False))
    closure_ok = report.is_controllable != expect_uncontrollable
    checks = {
        "closure": {
            "dimension_found": report.dimension_found,
            "dimension_full": report.dimension_full,
            "depth_reached": report.depth_reached,
            "is_controllable": report.is_controllable,
            "expected_uncontrollable": expect_uncontrollable,
            "pass": closure_ok,
        }
    }
    lines = [f"closure: {report}" + (" (expected)" if expect_uncontrollable and not report.is_controllable else "")]

    if N <= 4:
        rng = np.random.default_rng(cfg.seed)
        count = int(vf.get("oracle_waveforms", 20))
        steps = int(vf.get("oracle_steps", 8))
        dt = float(vf.get("oracle_dt_us", cfg.options.dt))
        worst = 0.0
        for _ in range(count):
            wf = ControlWaveform(rng.uniform(-np.pi, np.pi, steps), dt)
            psi0 = spin_coherent_state(N, rng.uniform(0, np.pi), rng.uniform(-np.pi, np.pi))
            worst = max(worst, 1 - fidelity(evolve(wf, params, psi0), full_space_evolve(wf, params, psi0)))
        oracle_ok = worst < 1e-8
        checks["oracle"] = {"waveforms": count, "worst_infidelity": worst, "pass": oracle_ok}
        lines.append(f"oracle infidelity {worst:.3e} over {count} waveforms ({'pass' if oracle_ok else 'FAIL'})")
    else:
        checks["oracle"] = {"skipped": f"full-space oracle needs N <= 4, got {N}", "pass": True}
        lines.append("oracle skipped (N > 4)")

    passed = all(c["pass"] for c in checks.values())
    doc = {"config": cfg.raw, "checks": checks, "pass": passed, "summary": "; ".join(lines)}
    write_atomic(out, _dumps(doc))
    for line in lines:
        log.info(line)
    _summary({"command": "verify", "pass": passed, "out": str(out)})
    return EXIT_OK if passed else EXIT_BELOW_GOAL


def cmd_simulate(cfg: RunConfig, out, waveform_path=None) -> int:
    path = waveform_path or cfg.simulate.get("waveform")
    if path is None:
        raise ConfigError("simulate needs a waveform file (--waveform or 'simulate.waveform')")
    waveform, wparams, _ = load_waveform(path)
    if wparams.n_atoms != cfg.n_atoms:
        raise ConfigError(f"waveform is for N={wparams.n_atoms}, config for N={cfg.n_atoms}")
    params = cfg.params
    basis, psi0, target = _states(cfg)
    problem = PhaseProblem(params, psi0, target, waveform.dt)
    rows = problem.states(waveform.phases, waveform.dt)
    final_fidelity = problem.fidelity(waveform.phases)

    snaps = cfg.simulate.get("snapshots")
    indices = list(range(len(rows))) if snaps is None else sorted({int(k) for k in snaps})
    if indices and (min(indices) < 0 or max(indices) >= len(rows)):
        raise ConfigError(f"key 'simulate.snapshots': indices must lie in 0..{len(rows) - 1}")
    last = len(rows) - 1

    def entry(k):
        bare = rows[k]
        dressed = basis.transform.conj().T @ bare
        return {
            "step": k,
            "time_us": k * waveform.dt,
            "bare": _complex_pairs(bare),
            "dressed": _complex_pairs(dressed),
            "dressed_density_real": np.real(np.outer(dressed, dressed.conj())).tolist(),
        }

    doc = {
        "config": cfg.raw,
        "waveform": waveform_to_dict(waveform, params, cfg.regime),
        "final_fidelity": final_fidelity,
        "snapshots": [entry(k) for k in indices],
        "final": entry(last),
    }
    write_atomic(out, _dumps(doc))
    _summary({"command": "simulate", "final_fidelity": final_fidelity, "out": str(out)})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydberg-dicke", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("optimize", "sweep", "verify", "simulate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML or JSON run configuration")
        p.add_argument("--out", help="output path (defaults to the config's 'output')")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="parallel restarts")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "simulate":
            p.add_argument("--waveform", help="waveform JSON (or an optimize result)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        out = args.out or cfg.output
        if out is None:
            raise ConfigError("no output path: pass --out or set 'output'")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.command == "optimize":
            return cmd_optimize(cfg, out, args.threads)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, args.threads)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        return cmd_simulate(cfg, out, args.waveform)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - report and exit 1
        log.exception("failed: %s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
