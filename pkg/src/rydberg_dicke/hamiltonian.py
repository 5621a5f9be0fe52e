"""Drift and microwave Hamiltonians, the dressed JC ladder and derived scales.

All frequencies are angular, in rad/us, and times are in us.  The frame
rotates at the microwave frequency for every hyperfine excitation and at
the laser frequency for the Rydberg excitation, so that |g,n> sits at
-n*delta_uw and |e,n> at -(n+1)*delta_uw - delta_r.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .hilbert import (
    BasisLabel,
    DickeVector,
    Manifold,
    _check_n_atoms,
    basis_index,
    basis_label,
    collective_spin,
    excitation_number,
)

TWO_PI = 2 * np.pi

__all__ = [
    "SystemParams",
    "DressedBasis",
    "LabelingError",
    "build_drift",
    "build_control",
    "control_derivative",
    "dressed_basis",
    "dressed_ladder_energies",
    "kappa_exact",
    "kappa_weak",
    "blockade_radius",
    "adiabaticity_parameter",
    "dressed_target",
    "to_dressed",
    "from_dressed",
]


class LabelingError(RuntimeError):
    """Dressed eigenvectors could not be matched uniquely to bare states."""


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of one control problem (angular frequencies, rad/us)."""

    n_atoms: int
    omega_r: float
    delta_r: float
    omega_uw: float = 0.0
    delta_uw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "n_atoms", _check_n_atoms(self.n_atoms))
        for name in ("omega_r", "delta_r", "omega_uw", "delta_uw"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.omega_r < 0:
            raise ValueError(f"omega_r must be non-negative, got {self.omega_r}")

    @classmethod
    def from_mhz(cls, n_atoms, omega_r, delta_r, omega_uw=0.0, delta_uw=0.0):
        """Build from ordinary frequencies f = omega/2pi in MHz."""
        return cls(
            n_atoms,
            TWO_PI * omega_r,
            TWO_PI * delta_r,
            TWO_PI * omega_uw,
            TWO_PI * delta_uw,
        )

    def to_mhz(self) -> dict:
        return {
            "omega_r": self.omega_r / TWO_PI,
            "delta_r": self.delta_r / TWO_PI,
            "omega_uw": self.omega_uw / TWO_PI,
            "delta_uw": self.delta_uw / TWO_PI,
        }

    @property
    def dim(self) -> int:
        return 2 * self.n_atoms + 1

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def build_drift(params: SystemParams) -> np.ndarray:
    """Jaynes-Cummings drift H0 in the doubly rotating frame.

    H0 = -delta_uw * N_exc - delta_r * P_e
         + sum_n (sqrt(n) omega_r / 2)(|g,n><e,n-1| + h.c.)
    """
    N = params.n_atoms
    d = params.dim
    h = -params.delta_uw * excitation_number(N)
    h[N + 1 :, N + 1 :] -= params.delta_r * np.eye(N)
    for n in range(1, N + 1):
        g = basis_index(BasisLabel(Manifold.GROUND, n), N)
        e = basis_index(BasisLabel(Manifold.EXCITED, n - 1), N)
        h[g, e] = h[e, g] = np.sqrt(n) * params.omega_r / 2
    assert h.shape == (d, d)
    return h


def _spin_xy(N):
    return collective_spin(N, "x"), collective_spin(N, "y")


def build_control(params: SystemParams, phase: float) -> np.ndarray:
    """Microwave term (omega_uw/2)(cos(phase) J_x + sin(phase) J_y)."""
    jx, jy = _spin_xy(params.n_atoms)
    return 0.5 * params.omega_uw * (np.cos(phase) * jx + np.sin(phase) * jy)


def control_derivative(params: SystemParams, phase: float) -> np.ndarray:
    """Derivative of :func:`build_control` with respect to the phase."""
    jx, jy = _spin_xy(params.n_atoms)
    return 0.5 * params.omega_uw * (-np.sin(phase) * jx + np.cos(phase) * jy)


class DressedBasis(NamedTuple):
    """Eigenbasis of the drift.

    Column ``k`` of ``transform`` is the dressed state adiabatically connected
    to the bare state with flat index ``k``; ``labels[k]`` is that bare label
    and ``energies[k]`` its eigenvalue.
    """

    transform: np.ndarray
    energies: np.ndarray
    labels: tuple

    def index(self, label: BasisLabel) -> int:
        return self.labels.index(BasisLabel(Manifold(label[0]), int(label[1])))

    @property
    def n_atoms(self) -> int:
        return (self.transform.shape[0] - 1) // 2

    def columns(self, manifold: Manifold) -> np.ndarray:
        return np.array([k for k, lab in enumerate(self.labels) if lab.manifold is manifold])


def _assign_labels(vecs, energies, candidates, tol=1e-9):
    """Match eigenvectors (columns of ``vecs``) to bare candidate rows.

    Columns are visited in ascending energy; each takes the free candidate
    with the largest overlap modulus, earlier candidates winning ties.
    """
    overlaps = np.abs(vecs)
    free = list(range(len(candidates)))
    assignment = {}
    for col in np.argsort(energies, kind="stable"):
        ov = overlaps[free, col]
        best = int(np.argmax(ov))
        top = ov[best]
        ties = np.flatnonzero(np.abs(ov - top) <= tol)
        if top < 1 / np.sqrt(2) - tol and len(ties) > 1:
            raise LabelingError(
                f"ambiguous dressed label: overlap {top:.3g} shared by "
                f"{[candidates[free[t]] for t in ties]}"
            )
        assignment[free.pop(best)] = col
    return assignment


def dressed_basis(params: SystemParams) -> DressedBasis:
    """Diagonalize the drift and label each eigenvector by its bare parent.

    The drift conserves the excitation number, so it is diagonalized block
    by block ({|g,0>} and {|g,n>, |e,n-1>} for n >= 1).  Each column's
    global phase is fixed so its largest component is real and positive.
    """
    N = params.n_atoms
    d = params.dim
    h0 = build_drift(params)
    transform = np.zeros((d, d), dtype=complex)
    energies = np.zeros(d)
    for n in range(N + 1):
        rows = [basis_index(BasisLabel(Manifold.GROUND, n), N)]
        if n >= 1:
            rows.append(basis_index(BasisLabel(Manifold.EXCITED, n - 1), N))
        block = h0[np.ix_(rows, rows)]
        vals, vecs = np.linalg.eigh(block)
        assignment = _assign_labels(vecs, vals, rows)
        for pos, col in assignment.items():
            v = vecs[:, col]
            k = int(np.argmax(np.abs(v)))
            v = v * (abs(v[k]) / v[k])
            target = rows[pos]
            transform[rows, target] = v
            energies[target] = vals[col]
    labels = tuple(basis_label(k, N) for k in range(d))
    return DressedBasis(transform, energies, labels)


def dressed_ladder_energies(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form JC ladder E_{+,n}, E_{-,n} for n = 1..N at delta_uw = 0.

    E_{+-,n} = -delta_r/2 +- sign(delta_r) sqrt(n omega_r^2 + delta_r^2)/2.
    E_+ is the branch connected to |g,n> (for delta_r != 0).
    """
    n = np.arange(1, params.n_atoms + 1)
    root = np.sqrt(n * params.omega_r**2 + params.delta_r**2)
    sgn = np.sign(params.delta_r)
    return -params.delta_r / 2 + sgn * root / 2, -params.delta_r / 2 - sgn * root / 2


def _ground_energy(basis: DressedBasis, n: int) -> float:
    return float(basis.energies[basis.index(BasisLabel(Manifold.GROUND, n))])


def kappa_exact(params: SystemParams) -> float:
    """Two-body nonlinearity E(2) - 2 E(1) + E(0) of the dressed ground ladder."""
    if params.n_atoms < 2:
        raise ValueError("kappa needs at least two atoms")
    basis = dressed_basis(params.replace(delta_uw=0.0))
    return _ground_energy(basis, 2) - 2 * _ground_energy(basis, 1) + _ground_energy(basis, 0)


def kappa_weak(params: SystemParams) -> float:
    """Weak-dressing estimate -omega_r^4 / (8 delta_r^3)."""
    if params.delta_r == 0:
        raise ZeroDivisionError("weak-dressing kappa is singular at delta_r = 0")
    return -params.omega_r**4 / (8 * params.delta_r**3)


def blockade_radius(c6_over_h: float, omega_r: float) -> float:
    """Blockade radius (|C6|/hbar/omega_r)^(1/6) in um.

    Args:
        c6_over_h: van der Waals coefficient C6/h in GHz um^6 (sign ignored).
        omega_r: Rydberg Rabi frequency in rad/us.
    """
    if omega_r <= 0:
        raise ValueError(f"Rabi frequency must be positive, got {omega_r}")
    if c6_over_h == 0:
        raise ValueError("C6 must be nonzero")
    c6_over_hbar = TWO_PI * abs(c6_over_h) * 1e3  # rad/us um^6
    return float((c6_over_hbar / omega_r) ** (1 / 6))


def adiabaticity_parameter(params: SystemParams) -> float:
    """sqrt(N) omega_r omega_uw^2 / |delta_r|^3; must be << 1 for dressed-ground control."""
    if params.delta_r == 0:
        raise ZeroDivisionError("adiabaticity parameter is singular at delta_r = 0")
    return float(
        np.sqrt(params.n_atoms) * params.omega_r * params.omega_uw**2 / abs(params.delta_r) ** 3
    )


def dressed_target(params: SystemParams, coeffs, basis: DressedBasis | None = None) -> DickeVector:
    """Superposition sum_n c_n |g~,n> of dressed ground states."""
    N = params.n_atoms
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    if c.size != N + 1:
        raise ValueError(f"expected {N + 1} coefficients, got {c.size}")
    if abs(np.linalg.norm(c) - 1) > 1e-9:
        raise ValueError(f"coefficients must be normalized, norm = {np.linalg.norm(c)!r}")
    if basis is None:
        basis = dressed_basis(params)
    cols = [basis.index(BasisLabel(Manifold.GROUND, n)) for n in range(N + 1)]
    amps = basis.transform[:, cols] @ c
    return DickeVector(amps / np.linalg.norm(amps), N)


def to_dressed(state: DickeVector, basis: DressedBasis) -> np.ndarray:
    """Amplitudes of ``state`` on the dressed columns of ``basis``."""
    return basis.transform.conj().T @ state.amplitudes


def from_dressed(amplitudes, basis: DressedBasis) -> DickeVector:
    return DickeVector(basis.transform @ np.asarray(amplitudes, dtype=complex), basis.n_atoms)
