"""Symmetric (Dicke) Hilbert space of a blockaded ensemble.

The space is the direct sum of a ground manifold (spin J = N/2, states
|g,n>, n = 0..N) and an excited manifold with one Rydberg atom (spin
J = (N-1)/2, states |e,n>, n = 0..N-1).  Vectors are stored in a single
array of length 2N+1: the ground block first, then the excited block, each
in ascending n.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np

__all__ = [
    "Manifold",
    "BasisLabel",
    "DickeVector",
    "dimension",
    "basis_index",
    "basis_label",
    "all_labels",
    "dicke_state",
    "spin_coherent_state",
    "cat_state",
    "collective_spin",
    "ground_projector",
    "excited_projector",
    "excitation_number",
    "fidelity",
]


class Manifold(enum.Enum):
    GROUND = "g"
    EXCITED = "e"


class BasisLabel(NamedTuple):
    manifold: Manifold
    n: int

    def __str__(self):
        return f"|{self.manifold.value},{self.n}>"


def _check_n_atoms(N):
    if int(N) != N or N < 1:
        raise ValueError(f"number of atoms must be a positive integer, got {N!r}")
    return int(N)


def dimension(N: int) -> int:
    """Size 2N+1 of the symmetric space for N atoms."""
    return 2 * _check_n_atoms(N) + 1


@dataclass(frozen=True, eq=False)
class DickeVector:
    """Pure state on the symmetric space of ``n_atoms`` atoms."""

    amplitudes: np.ndarray
    n_atoms: int

    def __post_init__(self):
        N = _check_n_atoms(self.n_atoms)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 * N + 1:
            raise ValueError(
                f"expected {2 * N + 1} amplitudes for N={N}, got {amps.size}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "n_atoms", N)

    @property
    def ground(self) -> np.ndarray:
        return self.amplitudes[: self.n_atoms + 1]

    @property
    def excited(self) -> np.ndarray:
        return self.amplitudes[self.n_atoms + 1 :]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def normalized(self) -> "DickeVector":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return DickeVector(self.amplitudes / nrm, self.n_atoms)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __len__(self):
        return self.amplitudes.size


def basis_index(label: BasisLabel, N: int) -> int:
    """Position of ``label`` in the flat amplitude array."""
    N = _check_n_atoms(N)
    manifold, n = Manifold(label[0]), int(label[1])
    if manifold is Manifold.GROUND:
        if not 0 <= n <= N:
            raise ValueError(f"ground label needs 0 <= n <= {N}, got n={n}")
        return n
    if not 0 <= n <= N - 1:
        raise ValueError(f"excited label needs 0 <= n <= {N - 1}, got n={n}")
    return N + 1 + n


def basis_label(index: int, N: int) -> BasisLabel:
    """Inverse of :func:`basis_index`."""
    N = _check_n_atoms(N)
    if not 0 <= index <= 2 * N:
        raise ValueError(f"index {index} outside 0..{2 * N}")
    if index <= N:
        return BasisLabel(Manifold.GROUND, int(index))
    return BasisLabel(Manifold.EXCITED, int(index - N - 1))


def all_labels(N: int) -> list[BasisLabel]:
    return [basis_label(k, N) for k in range(dimension(N))]


def dicke_state(N: int, n: int) -> DickeVector:
    """Bare ground-manifold Dicke state |g,n>."""
    N = _check_n_atoms(N)
    amps = np.zeros(2 * N + 1, dtype=complex)
    amps[basis_index(BasisLabel(Manifold.GROUND, n), N)] = 1.0
    return DickeVector(amps, N)


def spin_coherent_state(N: int, theta: float, phi: float = 0.0) -> DickeVector:
    """Product state (cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>)^N."""
    N = _check_n_atoms(N)
    n = np.arange(N + 1)
    binom = np.array([comb(N, k) for k in n], dtype=float)
    c = np.cos(theta / 2) ** (N - n) * (np.exp(1j * phi) * np.sin(theta / 2)) ** n
    amps = np.zeros(2 * N + 1, dtype=complex)
    amps[: N + 1] = np.sqrt(binom) * c
    return DickeVector(amps, N)


def cat_state(N: int, relative_phase: float = 0.0) -> DickeVector:
    """GHZ-type state (|g,0> + e^{i phase}|g,N>)/sqrt(2)."""
    N = _check_n_atoms(N)
    amps = np.zeros(2 * N + 1, dtype=complex)
    amps[0] = 1 / np.sqrt(2)
    amps[N] = np.exp(1j * relative_phase) / np.sqrt(2)
    return DickeVector(amps, N)


def _raising_block(J2: int) -> np.ndarray:
    # J2 = 2J; basis m = -J..J ascending, i.e. n = 0..2J
    size = J2 + 1
    n = np.arange(size - 1)
    return np.diag(np.sqrt((n + 1) * (J2 - n)), k=-1)


def collective_spin(N: int, axis: str) -> np.ndarray:
    """Collective spin component J_x, J_y, J_z or J_+ / J_- on both manifolds.

    The operator is block diagonal: spin N/2 on the ground block and spin
    (N-1)/2 on the excited block, with J_z|g,n> = (n - N/2)|g,n>.

    Args:
        N: number of atoms.
        axis: one of ``"x"``, ``"y"``, ``"z"``, ``"+"``, ``"-"``.

    Returns:
        Dense complex matrix of shape (2N+1, 2N+1).
    """
    N = _check_n_atoms(N)
    d = 2 * N + 1
    jp = np.zeros((d, d), dtype=complex)
    jp[: N + 1, : N + 1] = _raising_block(N)
    jp[N + 1 :, N + 1 :] = _raising_block(N - 1)
    if axis == "+":
        return jp
    if axis == "-":
        return jp.conj().T
    if axis == "x":
        return 0.5 * (jp + jp.conj().T)
    if axis == "y":
        return -0.5j * (jp - jp.conj().T)
    if axis == "z":
        jz = np.concatenate([np.arange(N + 1) - N / 2, np.arange(N) - (N - 1) / 2])
        return np.diag(jz).astype(complex)
    raise ValueError(f"unknown spin axis {axis!r}")


def ground_projector(N: int) -> np.ndarray:
    N = _check_n_atoms(N)
    return np.diag(np.r_[np.ones(N + 1), np.zeros(N)]).astype(complex)


def excited_projector(N: int) -> np.ndarray:
    N = _check_n_atoms(N)
    return np.diag(np.r_[np.zeros(N + 1), np.ones(N)]).astype(complex)


def excitation_number(N: int) -> np.ndarray:
    """Number of non-|0> atoms: n on |g,n>, n+1 on |e,n>.

    Conserved by the laser coupling, shifted by one by J_+.
    """
    N = _check_n_atoms(N)
    return np.diag(np.r_[np.arange(N + 1), np.arange(N) + 1]).astype(complex)


def fidelity(a: DickeVector, b: DickeVector) -> float:
    """State overlap |<a|b>|^2."""
    if a.n_atoms != b.n_atoms:
        raise ValueError(f"atom numbers differ: {a.n_atoms} vs {b.n_atoms}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
