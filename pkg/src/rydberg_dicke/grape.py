"""GRAPE phase optimization with random restarts, and fidelity landscapes.

Each restart draws phases uniformly from [-pi, pi) and climbs the exact
fidelity gradient with BFGS (Wolfe line search on 1 - F).  Restarts and
sweep cells are independent, get their own child seeds, and are reduced in
index order, so results do not depend on how many workers ran them.
"""
from __future__ import annotations

import enum
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .hamiltonian import (
    SystemParams,
    adiabaticity_parameter,
    dressed_basis,
    dressed_target,
    kappa_exact,
)
from .hilbert import DickeVector, Manifold, dicke_state
from .propagation import ControlWaveform, PhaseProblem

log = logging.getLogger(__name__)

__all__ = [
    "Regime",
    "OptimizeOptions",
    "RestartRecord",
    "OptimizationResult",
    "OptimizationError",
    "Landscape",
    "optimize",
    "optimize_dressed_ground",
    "dressed_leakage",
    "sweep_landscape",
    "speed_limit_estimate",
]

ADIABATICITY_WARNING = 0.05


class Regime(enum.Enum):
    FULL_HILBERT = "full_hilbert"
    DRESSED_GROUND = "dressed_ground"


class OptimizationError(RuntimeError):
    """The objective produced a non-finite value."""


@dataclass(frozen=True)
class OptimizeOptions:
    """Knobs for :func:`optimize`.

    ``steps`` may be left as ``None`` for dressed-ground runs, which then
    use 2N steps.  ``stop_at_goal`` skips restarts after the first one that
    reaches ``fidelity_goal``.
    """

    steps: Optional[int]
    dt: float
    restarts: int = 20
    max_iterations: int = 2000
    fidelity_goal: float = 1 - 1e-4
    gradient_tolerance: float = 1e-8
    seed: int = 0
    stop_at_goal: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.steps is not None and self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if not 0 < self.fidelity_goal <= 1:
            raise ValueError(f"fidelity_goal must lie in (0, 1], got {self.fidelity_goal}")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def for_duration(cls, steps: int, total_time: float, **kw) -> "OptimizeOptions":
        return cls(steps=steps, dt=total_time / steps, **kw)

    @property
    def total_time(self) -> Optional[float]:
        return None if self.steps is None else self.steps * self.dt

    def replace(self, **changes) -> "OptimizeOptions":
        return replace(self, **changes)


@dataclass
class RestartRecord:
    initial_phases: np.ndarray
    phases: np.ndarray
    fidelity: float
    iterations: int
    trace: np.ndarray
    message: str = ""


@dataclass
class OptimizationResult:
    best_waveform: Optional[ControlWaveform]
    best_fidelity: float
    fidelity_per_restart: np.ndarray
    iterations_used: np.ndarray
    converged: bool
    regime: Regime
    restarts: list = field(default_factory=list, repr=False)
    seed: int = 0
    peak_leakage: Optional[float] = None
    final_leakage: Optional[float] = None

    @property
    def best_restart(self) -> int:
        return int(np.argmax(self.fidelity_per_restart))

    @property
    def trivial(self) -> bool:
        """True when the initial state already met the goal and no waveform was needed."""
        return self.best_waveform is None


def _run_restart(problem: PhaseProblem, x0: np.ndarray, opts: OptimizeOptions) -> RestartRecord:
    trace = []

    def objective(x):
        fid, grad = problem.fidelity_and_gradient(x)
        if not np.isfinite(fid) or not np.all(np.isfinite(grad)):
            raise OptimizationError(
                f"non-finite fidelity {fid!r} at phases {np.array2string(x, precision=4)}"
            )
        return 1.0 - fid, -grad

    def callback(intermediate_result):
        fid = 1.0 - intermediate_result.fun
        trace.append(fid)
        if fid >= opts.fidelity_goal:
            raise StopIteration

    f0 = 1.0 - objective(x0)[0]
    trace.append(f0)
    if f0 >= opts.fidelity_goal or opts.max_iterations == 0:
        return RestartRecord(x0.copy(), x0.copy(), f0, 0, np.array(trace), "initial point")

    res = minimize(
        objective,
        x0,
        jac=True,
        method="BFGS",
        callback=callback,
        options={"maxiter": opts.max_iterations, "gtol": opts.gradient_tolerance, "norm": np.inf},
    )
    fid = 1.0 - float(res.fun)
    return RestartRecord(x0.copy(), np.asarray(res.x), fid, int(res.nit), np.array(trace), str(res.message))


def _initial_phases(seed: int, restarts: int, steps: int) -> list[np.ndarray]:
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [np.random.default_rng(c).uniform(-np.pi, np.pi, steps) for c in children]


def optimize(
    params: SystemParams,
    psi0: DickeVector,
    target: DickeVector,
    opts: OptimizeOptions,
    regime: Regime = Regime.FULL_HILBERT,
) -> OptimizationResult:
    """Maximize |<target|U(phi)|psi0>|^2 over ``opts.steps`` phases."""
    if opts.steps is None:
        raise ValueError("optimize needs an explicit number of steps")
    problem = PhaseProblem(params, psi0, target, opts.dt)
    if abs(np.linalg.norm(problem.target) - 1) > 1e-9:
        raise ValueError("target state must be normalized")

    overlap = float(abs(np.vdot(problem.target, problem.psi0)) ** 2)
    if overlap >= opts.fidelity_goal:
        log.info("initial state already meets the goal (F=%.12f); no control needed", overlap)
        return OptimizationResult(
            best_waveform=None,
            best_fidelity=overlap,
            fidelity_per_restart=np.array([overlap]),
            iterations_used=np.array([0]),
            converged=True,
            regime=regime,
            seed=opts.seed,
        )

    starts = _initial_phases(opts.seed, opts.restarts, opts.steps)
    records: list[RestartRecord] = []
    if opts.workers == 1:
        for k, x0 in enumerate(starts):
            rec = _run_restart(problem, x0, opts)
            log.debug("restart %d: F=%.8f after %d iterations", k, rec.fidelity, rec.iterations)
            records.append(rec)
            if opts.stop_at_goal and rec.fidelity >= opts.fidelity_goal:
                break
    else:
        with ThreadPoolExecutor(opts.workers) as pool:
            for rec in pool.map(lambda x: _run_restart(problem, x, opts), starts):
                records.append(rec)
                if opts.stop_at_goal and rec.fidelity >= opts.fidelity_goal:
                    break

    fids = np.array([r.fidelity for r in records])
    best = int(np.argmax(fids))
    return OptimizationResult(
        best_waveform=ControlWaveform(records[best].phases, opts.dt),
        best_fidelity=float(fids[best]),
        fidelity_per_restart=fids,
        iterations_used=np.array([r.iterations for r in records]),
        converged=bool(fids[best] >= opts.fidelity_goal),
        regime=regime,
        restarts=records,
        seed=opts.seed,
    )


def dressed_leakage(
    waveform: ControlWaveform,
    params: SystemParams,
    psi0: DickeVector,
    substeps: int = 8,
) -> tuple[np.ndarray, np.ndarray]:
    """Dressed-excited population sampled ``substeps`` times per phase step.

    Returns the sample times (us) and populations, including t = 0.
    """
    basis = dressed_basis(params)
    exc = basis.columns(Manifold.EXCITED)
    proj = basis.transform[:, exc].conj().T
    problem = PhaseProblem(params)
    us = problem.propagators(waveform.phases, waveform.dt / substeps)
    psi = np.asarray(psi0.amplitudes, dtype=complex)
    pops = [float(np.sum(np.abs(proj @ psi) ** 2))]
    for u in us:
        for _ in range(substeps):
            psi = u @ psi
            pops.append(float(np.sum(np.abs(proj @ psi) ** 2)))
    times = np.arange(len(pops)) * waveform.dt / substeps
    return times, np.array(pops)


def optimize_dressed_ground(
    params: SystemParams,
    coeffs,
    opts: OptimizeOptions,
    initial_coeffs=None,
    warn_threshold: float = ADIABATICITY_WARNING,
) -> OptimizationResult:
    """Dressed-ground control toward sum_n c_n |g~,n>.

    Starts from the dressed fiducial state |g~,0> = |g,0> unless
    ``initial_coeffs`` names another dressed-ground superposition.  Uses 2N
    steps when ``opts.steps`` is None and reports the peak and final
    population found in the dressed-excited manifold.
    """
    eta = adiabaticity_parameter(params)
    if eta > warn_threshold:
        warnings.warn(
            f"adiabaticity parameter {eta:.3g} exceeds {warn_threshold}; "
            "dressed-excited leakage may spoil dressed-ground control",
            RuntimeWarning,
            stacklevel=2,
        )
    N = params.n_atoms
    if opts.steps is None:
        opts = opts.replace(steps=2 * N)
    basis = dressed_basis(params)
    target = dressed_target(params, coeffs, basis)
    if initial_coeffs is None:
        psi0 = dicke_state(N, 0)
    else:
        psi0 = dressed_target(params, initial_coeffs, basis)
    result = optimize(params, psi0, target, opts, regime=Regime.DRESSED_GROUND)
    if result.best_waveform is None:
        result.peak_leakage = result.final_leakage = 0.0
    else:
        _, pops = dressed_leakage(result.best_waveform, params, psi0)
        result.peak_leakage = float(pops.max())
        result.final_leakage = float(pops[-1])
    return result


def speed_limit_estimate(params: SystemParams) -> float:
    """One-axis-twisting cat time pi/|kappa| in us."""
    kappa = kappa_exact(params)
    if kappa == 0:
        raise ZeroDivisionError("kappa vanishes; no finite speed limit")
    return float(np.pi / abs(kappa))


@dataclass
class Landscape:
    """Best fidelities on a (delta_r, T) grid; rows follow ``delta_r``."""

    delta_r: np.ndarray
    times: np.ndarray
    fidelity: np.ndarray
    iterations: np.ndarray
    restarts_used: np.ndarray
    seeds: np.ndarray
    errors: dict = field(default_factory=dict)

    @property
    def failed(self) -> np.ndarray:
        return np.isnan(self.fidelity)

    def threshold_times(self, level: float = 0.99) -> np.ndarray:
        """First grid time per row whose fidelity reaches ``level`` (NaN if none)."""
        out = np.full(len(self.delta_r), np.nan)
        for i, row in enumerate(self.fidelity):
            hits = np.flatnonzero(np.nan_to_num(row, nan=-1.0) >= level)
            if hits.size:
                out[i] = self.times[hits[0]]
        return out


def _cell_seed(seed: int, i: int, j: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(i, j)).generate_state(1)[0])


def sweep_landscape(
    base_params: SystemParams,
    target_coeffs,
    steps: int,
    delta_r_grid: Sequence[float],
    time_grid: Sequence[float],
    opts: OptimizeOptions,
    delta_uw_ratio: Optional[float] = None,
    initial_coeffs=None,
) -> Landscape:
    """Run :func:`optimize` on every (delta_r, T) cell with dt = T/steps.

    When ``delta_uw_ratio`` is given, each row uses
    delta_uw = delta_uw_ratio * delta_r, keeping the microwave at the same
    relative position between the manifolds.  A cell that raises is logged
    and stored as NaN; the sweep carries on.
    """
    delta_r_grid = np.asarray(delta_r_grid, dtype=float)
    time_grid = np.asarray(time_grid, dtype=float)
    if delta_r_grid.size == 0 or time_grid.size == 0:
        raise ValueError("sweep grids must be non-empty")
    shape = (delta_r_grid.size, time_grid.size)
    fid = np.full(shape, np.nan)
    iters = np.zeros(shape, dtype=int)
    used = np.zeros(shape, dtype=int)
    seeds = np.zeros(shape, dtype=np.int64)
    errors = {}
    for i, dr in enumerate(delta_r_grid):
        changes = {"delta_r": float(dr)}
        if delta_uw_ratio is not None:
            changes["delta_uw"] = float(delta_uw_ratio * dr)
        params = base_params.replace(**changes)
        basis = dressed_basis(params)
        target = dressed_target(params, target_coeffs, basis)
        psi0 = (
            dicke_state(params.n_atoms, 0)
            if initial_coeffs is None
            else dressed_target(params, initial_coeffs, basis)
        )
        for j, total in enumerate(time_grid):
            seeds[i, j] = _cell_seed(opts.seed, i, j)
            cell_opts = opts.replace(steps=steps, dt=float(total) / steps, seed=int(seeds[i, j]))
            try:
                res = optimize(params, psi0, target, cell_opts)
            except Exception as exc:  # noqa: BLE001 - sweeps must survive bad cells
                log.warning("cell (%d, %d) failed: %s", i, j, exc)
                errors[(i, j)] = repr(exc)
                continue
            fid[i, j] = res.best_fidelity
            iters[i, j] = int(np.sum(res.iterations_used))
            used[i, j] = len(res.fidelity_per_restart)
            log.info("delta_r=%.4g T=%.4g: F=%.6f", dr, total, res.best_fidelity)
    return Landscape(delta_r_grid, time_grid, fid, iters, used, seeds, errors)
