"""Run configuration files.

A config is a YAML (or JSON) mapping.  Frequencies are ordinary
frequencies in MHz and times are in us; they are converted to rad/us once,
here.  Unknown keys are rejected with the offending key in the message.

Example::

    n_atoms: 7
    params_mhz: {omega_r: 5.0, delta_r: 2.5, omega_uw: 12.5, delta_uw: 1.25}
    target: {kind: cat, phase: 0.0}
    initial: {kind: coherent, theta: 1.5707963267948966, phi: 0.0}
    regime: full_hilbert
    optimize: {steps: 28, total_time_us: 1.0, restarts: 50}
    seed: 1
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .grape import OptimizeOptions, Regime
from .hamiltonian import SystemParams
from .hilbert import cat_state, dicke_state, spin_coherent_state

__all__ = ["ConfigError", "StateSpec", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


_TOP_KEYS = {
    "n_atoms", "params_mhz", "target", "initial", "regime", "optimize",
    "seed", "output", "sweep", "verify", "simulate",
}
_PARAM_KEYS = {"omega_r", "delta_r", "omega_uw", "delta_uw"}
_OPT_KEYS = {
    "steps", "dt_us", "total_time_us", "restarts", "max_iterations",
    "fidelity_goal", "gradient_tolerance", "stop_at_goal",
}
_SWEEP_KEYS = {"delta_r_mhz", "total_time_us", "steps", "delta_uw_ratio"}
_VERIFY_KEYS = {"oracle_waveforms", "oracle_steps", "oracle_dt_us", "expected_uncontrollable", "closure_tolerance"}
_SIMULATE_KEYS = {"waveform", "snapshots"}
_STATE_KINDS = {
    "cat": {"kind", "phase"},
    "dicke": {"kind", "n"},
    "coherent": {"kind", "theta", "phi"},
    "coefficients": {"kind", "values"},
}


def _reject_unknown(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(section).__name__}")
    extra = sorted(set(section) - allowed)
    if extra:
        prefix = f"{where}." if where else ""
        raise ConfigError(f"unknown key '{prefix}{extra[0]}'")


def _number(section, key, where, kind=float, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key '{where}{key}'")
        return default
    value = section[key]
    try:
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        if kind is bool:
            if not isinstance(value, bool):
                raise ValueError
            return value
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key '{where}{key}': expected {kind.__name__}, got {value!r}") from None


@dataclass(frozen=True)
class StateSpec:
    """Ground-manifold superposition named in a config (target or initial)."""

    kind: str
    phase: float = 0.0
    n: int = 0
    theta: float = 0.0
    phi: float = 0.0
    values: tuple = ()

    def coefficients(self, n_atoms: int) -> np.ndarray:
        """Dressed-ground coefficients c_n, n = 0..N."""
        if self.kind == "cat":
            vec = cat_state(n_atoms, self.phase)
        elif self.kind == "dicke":
            if not 0 <= self.n <= n_atoms:
                raise ConfigError(f"key 'n': Dicke index {self.n} outside 0..{n_atoms}")
            vec = dicke_state(n_atoms, self.n)
        elif self.kind == "coherent":
            vec = spin_coherent_state(n_atoms, self.theta, self.phi)
        else:
            c = np.asarray(self.values, dtype=complex)
            if c.size != n_atoms + 1:
                raise ConfigError(f"key 'values': expected {n_atoms + 1} coefficients, got {c.size}")
            return c / np.linalg.norm(c)
        return np.array(vec.ground)

    def to_dict(self) -> dict:
        if self.kind == "cat":
            return {"kind": "cat", "phase": self.phase}
        if self.kind == "dicke":
            return {"kind": "dicke", "n": self.n}
        if self.kind == "coherent":
            return {"kind": "coherent", "theta": self.theta, "phi": self.phi}
        return {"kind": "coefficients", "values": [[v.real, v.imag] for v in map(complex, self.values)]}


def _parse_state(section, where) -> StateSpec:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError(f"key '{where}': expected a mapping with a 'kind'")
    kind = section["kind"]
    if kind not in _STATE_KINDS:
        raise ConfigError(f"key '{where}.kind': unknown state kind {kind!r}")
    _reject_unknown(section, _STATE_KINDS[kind], where)
    w = f"{where}."
    if kind == "cat":
        return StateSpec("cat", phase=_number(section, "phase", w, default=0.0))
    if kind == "dicke":
        return StateSpec("dicke", n=_number(section, "n", w, int, required=True))
    if kind == "coherent":
        return StateSpec(
            "coherent",
            theta=_number(section, "theta", w, required=True),
            phi=_number(section, "phi", w, default=0.0),
        )
    raw = section.get("values")
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"key '{w}values': expected a non-empty list")
    vals = []
    for item in raw:
        if isinstance(item, (list, tuple)) and len(item) == 2:
            vals.append(complex(float(item[0]), float(item[1])))
        elif isinstance(item, (int, float)):
            vals.append(complex(item))
        else:
            raise ConfigError(f"key '{w}values': entries must be numbers or [re, im] pairs")
    if np.linalg.norm(vals) == 0:
        raise ConfigError(f"key '{w}values': coefficients are all zero")
    return StateSpec("coefficients", values=tuple(vals))


@dataclass
class RunConfig:
    params: SystemParams
    target: StateSpec
    initial: Optional[StateSpec]
    regime: Regime
    options: OptimizeOptions
    seed: int
    output: Optional[str] = None
    sweep: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def n_atoms(self) -> int:
        return self.params.n_atoms

    def with_seed(self, seed: int) -> "RunConfig":
        raw = dict(self.raw, seed=int(seed))
        return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    _reject_unknown(raw, _TOP_KEYS, "")
    n_atoms = _number(raw, "n_atoms", "", int, required=True)
    if n_atoms < 1:
        raise ConfigError(f"key 'n_atoms': must be >= 1, got {n_atoms}")

    pm = raw.get("params_mhz")
    if pm is None:
        raise ConfigError("missing required key 'params_mhz'")
    _reject_unknown(pm, _PARAM_KEYS, "params_mhz")
    try:
        params = SystemParams.from_mhz(
            n_atoms,
            _number(pm, "omega_r", "params_mhz.", required=True),
            _number(pm, "delta_r", "params_mhz.", required=True),
            _number(pm, "omega_uw", "params_mhz.", default=0.0),
            _number(pm, "delta_uw", "params_mhz.", default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"key 'params_mhz': {exc}") from None

    target = _parse_state(raw.get("target", {"kind": "cat"}), "target")
    initial = _parse_state(raw["initial"], "initial") if "initial" in raw else None

    regime_name = raw.get("regime", Regime.FULL_HILBERT.value)
    try:
        regime = Regime(regime_name)
    except ValueError:
        raise ConfigError(f"key 'regime': unknown regime {regime_name!r}") from None

    seed = _number(raw, "seed", "", int, default=0)
    opt = raw.get("optimize", {})
    _reject_unknown(opt, _OPT_KEYS, "optimize")
    steps = _number(opt, "steps", "optimize.", int)
    if steps is None and regime is Regime.DRESSED_GROUND:
        steps = 2 * n_atoms
    if steps is None:
        raise ConfigError("missing required key 'optimize.steps'")
    dt = _number(opt, "dt_us", "optimize.")
    total = _number(opt, "total_time_us", "optimize.")
    if (dt is None) == (total is None):
        if "sweep" not in raw or dt is not None:
            raise ConfigError("key 'optimize': give exactly one of 'dt_us' or 'total_time_us'")
        total = 1.0  # placeholder; sweeps set dt per cell
    if dt is None:
        dt = total / steps
    defaults = OptimizeOptions(steps=steps, dt=1.0)
    try:
        options = OptimizeOptions(
            steps=steps,
            dt=dt,
            restarts=_number(opt, "restarts", "optimize.", int, default=defaults.restarts),
            max_iterations=_number(opt, "max_iterations", "optimize.", int, default=defaults.max_iterations),
            fidelity_goal=_number(opt, "fidelity_goal", "optimize.", default=defaults.fidelity_goal),
            gradient_tolerance=_number(opt, "gradient_tolerance", "optimize.", default=defaults.gradient_tolerance),
            seed=seed,
            stop_at_goal=_number(opt, "stop_at_goal", "optimize.", bool, default=True),
        )
    except ValueError as exc:
        raise ConfigError(f"key 'optimize': {exc}") from None

    sweep = raw.get("sweep", {})
    _reject_unknown(sweep, _SWEEP_KEYS, "sweep")
    verify = raw.get("verify", {})
    _reject_unknown(verify, _VERIFY_KEYS, "verify")
    simulate = raw.get("simulate", {})
    _reject_unknown(simulate, _SIMULATE_KEYS, "simulate")

    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("key 'output': expected a path string")

    return RunConfig(
        params=params,
        target=target,
        initial=initial,
        regime=regime,
        options=options,
        seed=seed,
        output=output,
        sweep=dict(sweep),
        verify=dict(verify),
        simulate=dict(simulate),
        raw=raw,
    )


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw: Any = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(raw)
