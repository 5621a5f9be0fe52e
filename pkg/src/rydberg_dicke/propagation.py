"""Piecewise-constant evolution and exact phase gradients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import SystemParams, build_drift
from .hilbert import DickeVector, collective_spin

__all__ = [
    "ControlWaveform",
    "step_propagator",
    "propagators",
    "evolve",
    "trajectory",
    "fidelity_and_gradient",
    "PhaseProblem",
]

HERMITIAN_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ControlWaveform:
    """``s`` microwave phases (rad), each held for ``dt`` (us)."""

    phases: np.ndarray
    dt: float

    def __post_init__(self):
        phases = np.array(self.phases, dtype=float).reshape(-1)
        if phases.size < 1:
            raise ValueError("a waveform needs at least one phase step")
        if not np.all(np.isfinite(phases)):
            raise ValueError("phases must be finite")
        if not self.dt > 0:
            raise ValueError(f"step duration must be positive, got {self.dt}")
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def steps(self) -> int:
        return self.phases.size

    @property
    def total_time(self) -> float:
        return self.steps * self.dt

    def __len__(self):
        return self.steps

    def split(self, j: int) -> tuple["ControlWaveform", "ControlWaveform"]:
        return ControlWaveform(self.phases[:j], self.dt), ControlWaveform(self.phases[j:], self.dt)


def _check_hermitian(h):
    h = np.asarray(h)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {h.shape}")
    asym = np.max(np.abs(h - np.swapaxes(h, -1, -2).conj()), initial=0.0)
    if asym > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3g})")


def _expm_from_eig(vals, vecs, dt):
    phases = np.exp(-1j * vals * dt)
    return (vecs * phases[..., None, :]) @ np.swapaxes(vecs, -1, -2).conj()


def step_propagator(H, dt: float) -> np.ndarray:
    """exp(-i H dt) for Hermitian ``H`` via its eigendecomposition."""
    _check_hermitian(H)
    vals, vecs = np.linalg.eigh(H)
    return _expm_from_eig(vals, vecs, dt)


class PhaseProblem:
    """Cached operators for repeated evaluation of one control problem.

    Holds H0, the two microwave quadratures and the end states, so that the
    optimizer only pays for eigendecompositions of the step Hamiltonians.
    """

    def __init__(self, params: SystemParams, psi0=None, target=None, dt=None):
        self.params = params
        self.h0 = build_drift(params)
        half = 0.5 * params.omega_uw
        self.hx = half * collective_spin(params.n_atoms, "x")
        self.hy = half * collective_spin(params.n_atoms, "y")
        self.psi0 = None if psi0 is None else _amplitudes(psi0, params)
        self.target = None if target is None else _amplitudes(target, params)
        self.dt = dt

    def hamiltonians(self, phases):
        c = np.cos(phases)[:, None, None]
        s = np.sin(phases)[:, None, None]
        return self.h0 + c * self.hx + s * self.hy

    def eig(self, phases):
        return np.linalg.eigh(self.hamiltonians(np.asarray(phases, dtype=float)))

    def propagators(self, phases, dt):
        vals, vecs = self.eig(phases)
        return _expm_from_eig(vals, vecs, dt)

    def states(self, phases, dt, psi0=None):
        """Forward states; row k is the state after k steps (row 0 = psi0)."""
        psi = self.psi0 if psi0 is None else psi0
        us = self.propagators(phases, dt)
        out = np.empty((len(us) + 1, psi.size), dtype=complex)
        out[0] = psi
        for k, u in enumerate(us):
            out[k + 1] = u @ out[k]
        return out

    def fidelity(self, phases, dt=None):
        dt = self.dt if dt is None else dt
        final = self.states(phases, dt)[-1]
        return float(abs(np.vdot(self.target, final)) ** 2)

    def fidelity_and_gradient(self, phases, dt=None):
        """Transfer fidelity and its exact derivative with respect to each phase.

        The derivative of exp(-i H dt) is taken in the eigenbasis of H, where
        d/dphi U = V (G o V^+ dH V) V^+ with
        G_jk = (e^{-i l_j dt} - e^{-i l_k dt}) / (l_j - l_k), written through
        sinc so that degenerate pairs need no special case.
        """
        dt = self.dt if dt is None else dt
        phases = np.asarray(phases, dtype=float)
        s = phases.size
        vals, vecs = self.eig(phases)
        us = _expm_from_eig(vals, vecs, dt)

        fwd = np.empty((s + 1, self.psi0.size), dtype=complex)
        fwd[0] = self.psi0
        for k in range(s):
            fwd[k + 1] = us[k] @ fwd[k]
        # bwd[k] = U_{k+1}^+ ... U_s^+ |target>, i.e. the costate after step k
        bwd = np.empty_like(fwd)
        bwd[s] = self.target
        for k in range(s - 1, -1, -1):
            bwd[k] = us[k].conj().T @ bwd[k + 1]

        amp = np.vdot(self.target, fwd[s])
        fid = float(abs(amp) ** 2)

        dh = -np.sin(phases)[:, None, None] * self.hx + np.cos(phases)[:, None, None] * self.hy
        vh = np.swapaxes(vecs, -1, -2).conj()
        m = vh @ dh @ vecs
        lam_sum = vals[:, :, None] + vals[:, None, :]
        lam_diff = vals[:, :, None] - vals[:, None, :]
        g = -1j * dt * np.exp(-0.5j * lam_sum * dt) * np.sinc(lam_diff * dt / (2 * np.pi))
        x = np.einsum("kij,kj->ki", vh, fwd[:-1])
        y = np.einsum("kij,kj->ki", vh, bwd[1:])
        damp = np.einsum("ki,kij,kj->k", y.conj(), g * m, x)
        grad = 2 * np.real(np.conj(amp) * damp)
        return fid, grad


def _amplitudes(state, params):
    amps = np.asarray(state.amplitudes if isinstance(state, DickeVector) else state, dtype=complex)
    if amps.shape != (params.dim,):
        raise ValueError(f"state has shape {amps.shape}, expected ({params.dim},)")
    if isinstance(state, DickeVector) and state.n_atoms != params.n_atoms:
        raise ValueError(f"state is for N={state.n_atoms}, params for N={params.n_atoms}")
    return amps


def propagators(waveform: ControlWaveform, params: SystemParams) -> np.ndarray:
    """Stack of step unitaries U_k = exp(-i (H0 + Hc(phi_k)) dt)."""
    return PhaseProblem(params).propagators(waveform.phases, waveform.dt)


def trajectory(waveform: ControlWaveform, params: SystemParams, psi0: DickeVector) -> list[DickeVector]:
    """States after 0, 1, ..., s steps."""
    rows = PhaseProblem(params, psi0).states(waveform.phases, waveform.dt)
    return [DickeVector(r, params.n_atoms) for r in rows]


def evolve(waveform: ControlWaveform, params: SystemParams, psi0: DickeVector) -> DickeVector:
    """Apply U_s ... U_1 to ``psi0``."""
    final = PhaseProblem(params, psi0).states(waveform.phases, waveform.dt)[-1]
    return DickeVector(final, params.n_atoms)


def fidelity_and_gradient(waveform: ControlWaveform, params: SystemParams, psi0: DickeVector, target: DickeVector):
    """Return ``(F, dF/dphi)`` for F = |<target|U(phi)|psi0>|^2."""
    problem = PhaseProblem(params, psi0, target)
    if abs(np.linalg.norm(problem.target) - 1) > 1e-9:
        raise ValueError("target state must be normalized")
    return problem.fidelity_and_gradient(waveform.phases, waveform.dt)
