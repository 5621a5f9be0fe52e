"""Independent oracles for the symmetric JC model.

* a numerical Lie-closure rank test for controllability,
* a brute-force simulation of N three-level atoms in the full 3^N space
  with a hard Rydberg blockade,
* one-axis twisting exp(-i kappa T J_z^2 / 2) on the ground manifold.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import minimize_scalar

from .hamiltonian import SystemParams
from .hilbert import DickeVector, _check_n_atoms, spin_coherent_state
from .propagation import ControlWaveform, _check_hermitian, _expm_from_eig

__all__ = [
    "LieClosureReport",
    "lie_closure_dimension",
    "symmetric_embedding",
    "full_space_hamiltonian",
    "full_space_evolve",
    "rydberg_count",
    "oat_evolve",
    "z_rotate",
    "fidelity_modulo_z_rotation",
    "equatorial_cat_fidelity",
]

MAX_FULL_SPACE_ATOMS = 4


@dataclass(frozen=True)
class LieClosureReport:
    dimension_found: int
    dimension_full: int
    depth_reached: int
    is_controllable: bool

    def __str__(self):
        verdict = "controllable" if self.is_controllable else "not controllable"
        return f"{self.dimension_found}/{self.dimension_full}, {verdict}"


def _to_real(a):
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def _from_real(v, d):
    half = d * d
    return (v[:half] + 1j * v[half:]).reshape(d, d)


def lie_closure_dimension(generators, tol: float = 1e-9, max_depth: int = 64) -> LieClosureReport:
    """Dimension of the real Lie algebra generated by ``{i H_k}`` inside su(d).

    Elements are traceless anti-Hermitian matrices viewed as real vectors
    under the Hilbert-Schmidt inner product.  Each generation commutes the
    newest basis elements with the whole basis and keeps the parts that
    survive modified Gram-Schmidt with relative tolerance ``tol``.
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise ValueError(f"generator shapes differ: {g.shape} vs {(d, d)}")
        _check_hermitian(g)
    full = d * d - 1

    q = np.zeros((full, 2 * d * d))
    basis: list[np.ndarray] = []

    def add(mat):
        v = _to_real(mat)
        norm0 = np.linalg.norm(v)
        if norm0 == 0 or len(basis) == full:
            return None
        k = len(basis)
        for _ in range(2):  # reorthogonalize once for stability
            v = v - q[:k].T @ (q[:k] @ v)
        norm = np.linalg.norm(v)
        if norm <= tol * norm0:
            return None
        v = v / norm
        q[k] = v
        basis.append(v)
        return v

    eye = np.eye(d)
    frontier = []
    for g in gens:
        a = 1j * (g - np.trace(g) / d * eye)
        v = add(a)
        if v is not None:
            frontier.append(v)

    depth = 0
    while frontier and len(basis) < full and depth < max_depth:
        depth += 1
        mats = [_from_real(b, d) for b in basis]
        new = []
        for v in frontier:
            x = _from_real(v, d)
            for y in mats:
                w = add(x @ y - y @ x)
                if w is not None:
                    new.append(w)
                    mats.append(_from_real(w, d))
                if len(basis) == full:
                    break
            if len(basis) == full:
                break
        frontier = new

    dim = len(basis)
    return LieClosureReport(dim, full, depth, dim == full)


# --- full tensor-product oracle -------------------------------------------

def _configurations(N):
    # single-atom levels: 0 -> |0>, 1 -> |1>, 2 -> |r>
    return list(itertools.product(range(3), repeat=N))


def rydberg_count(N: int) -> np.ndarray:
    """Number of Rydberg atoms in each 3^N product configuration."""
    return np.array([c.count(2) for c in _configurations(N)])


def symmetric_embedding(N: int) -> np.ndarray:
    """Isometry (3^N x (2N+1)) mapping Dicke amplitudes to the full space."""
    N = _check_n_atoms(N)
    configs = _configurations(N)
    w = np.zeros((3**N, 2 * N + 1))
    for idx, c in enumerate(configs):
        ones, ryd = c.count(1), c.count(2)
        if ryd == 0:
            w[idx, ones] = 1 / np.sqrt(comb(N, ones))
        elif ryd == 1:
            # one Rydberg atom, `ones` atoms in |1>, N - ones - 1 in |0>
            w[idx, N + 1 + ones] = 1 / np.sqrt(N * comb(N - 1, ones))
    return w


def _single_atom_ops():
    ket = np.eye(3)
    s_plus = np.outer(ket[1], ket[0])  # |1><0|
    sx = 0.5 * (s_plus + s_plus.T)
    sy = -0.5j * (s_plus - s_plus.T)
    laser = np.outer(ket[2], ket[1]) + np.outer(ket[1], ket[2])
    return sx, sy, laser


def _embed(op, site, N):
    mats = [np.eye(3)] * N
    mats[site] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def full_space_hamiltonian(params: SystemParams, phase: float) -> np.ndarray:
    """Sum of single-atom Hamiltonians in the 3^N space (no blockade yet).

    Level energies follow the symmetric model's frame: |1> at -delta_uw,
    |r> at -delta_uw - delta_r.
    """
    N = params.n_atoms
    sx, sy, laser = _single_atom_ops()
    single = (
        np.diag([0.0, -params.delta_uw, -params.delta_uw - params.delta_r]).astype(complex)
        + 0.5 * params.omega_r * laser
        + 0.5 * params.omega_uw * (np.cos(phase) * sx + np.sin(phase) * sy)
    )
    return sum(_embed(single, k, N) for k in range(N))


def full_space_evolve(
    waveform: ControlWaveform,
    params: SystemParams,
    initial,
    return_full: bool = False,
    tol: float = 1e-10,
):
    """Evolve N atoms in the blockaded 3^N space and project onto Dicke states.

    ``initial`` is either a :class:`DickeVector` or a symmetric 3^N vector.
    States with two or more Rydberg atoms are removed from the Hamiltonian,
    which is the perfect-blockade limit.

    Returns the projected :class:`DickeVector`, and also the full final
    vector when ``return_full`` is set.
    """
    N = params.n_atoms
    if N > MAX_FULL_SPACE_ATOMS:
        raise ValueError(f"full-space oracle limited to N <= {MAX_FULL_SPACE_ATOMS}, got {N}")
    w = symmetric_embedding(N)
    if isinstance(initial, DickeVector):
        if initial.n_atoms != N:
            raise ValueError(f"initial state is for N={initial.n_atoms}, params for N={N}")
        psi = w @ initial.amplitudes
    else:
        psi = np.asarray(initial, dtype=complex).reshape(-1)
        if psi.size != 3**N:
            raise ValueError(f"expected a vector of length {3**N}, got {psi.size}")
        residual = np.linalg.norm(psi - w @ (w.T @ psi))
        if residual > tol:
            raise ValueError(f"initial state is not permutation symmetric (residual {residual:.3g})")

    allowed = np.flatnonzero(rydberg_count(N) <= 1)
    sub = psi[allowed]
    if np.linalg.norm(psi) - np.linalg.norm(sub) > tol:
        raise ValueError("initial state has population in doubly-excited Rydberg states")
    for phase in waveform.phases:
        h = full_space_hamiltonian(params, phase)[np.ix_(allowed, allowed)]
        vals, vecs = np.linalg.eigh(h)
        sub = _expm_from_eig(vals, vecs, waveform.dt) @ sub
    final = np.zeros(3**N, dtype=complex)
    final[allowed] = sub

    amps = w.T @ final
    residual = np.linalg.norm(final - w @ amps)
    if residual > tol:
        raise RuntimeError(f"evolution left the symmetric subspace (residual {residual:.3g})")
    out = DickeVector(amps, N)
    return (out, final) if return_full else out


# --- one-axis twisting -----------------------------------------------------

def _ground_jz(N):
    return np.arange(N + 1) - N / 2


def oat_evolve(N: int, kappa: float, T: float, psi0: DickeVector, tol: float = 1e-12) -> DickeVector:
    """Apply exp(-i (kappa T / 2) J_z^2) to a ground-manifold state."""
    N = _check_n_atoms(N)
    if psi0.n_atoms != N:
        raise ValueError(f"state is for N={psi0.n_atoms}, expected N={N}")
    if np.linalg.norm(psi0.excited) > tol:
        raise ValueError("one-axis twisting acts on ground-manifold states only")
    amps = np.zeros(2 * N + 1, dtype=complex)
    amps[: N + 1] = np.exp(-0.5j * kappa * T * _ground_jz(N) ** 2) * psi0.ground
    return DickeVector(amps, N)


def z_rotate(state: DickeVector, angle: float) -> DickeVector:
    """exp(-i angle J_z) on the ground block (excited block left unchanged)."""
    N = state.n_atoms
    amps = np.array(state.amplitudes)
    amps[: N + 1] *= np.exp(-1j * angle * _ground_jz(N))
    return DickeVector(amps, N)


def _maximize_over_angle(func, max_freq):
    grid = np.linspace(0, 2 * np.pi, 64 * max(max_freq, 1), endpoint=False)
    vals = np.array([func(t) for t in grid])
    k = int(np.argmax(vals))
    step = grid[1] - grid[0]
    res = minimize_scalar(
        lambda t: -func(t),
        bounds=(grid[k] - step, grid[k] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    if -res.fun >= vals[k]:
        return float(-res.fun), float(res.x % (2 * np.pi))
    return float(vals[k]), float(grid[k])


def fidelity_modulo_z_rotation(a: DickeVector, b: DickeVector) -> tuple[float, float]:
    """max over theta of |<a| exp(-i theta J_z) |b>|^2 on ground amplitudes.

    Returns ``(fidelity, theta)``.
    """
    if a.n_atoms != b.n_atoms:
        raise ValueError("atom numbers differ")
    N = a.n_atoms
    ga, gb, jz = a.ground.conj(), b.ground, _ground_jz(N)
    return _maximize_over_angle(
        lambda t: abs(np.sum(ga * np.exp(-1j * t * jz) * gb)) ** 2, N
    )


def equatorial_cat_fidelity(state: DickeVector) -> tuple[float, float]:
    """Best overlap with a cat (|+n>^N + e^{i chi}|-n>^N)/sqrt(2), n on the equator.

    Both the axis azimuth and the relative phase chi are optimized; for a
    fixed axis the best chi gives (|<+n|psi>| + |<-n|psi>|)^2 / 2.
    Returns ``(fidelity, azimuth)``.
    """
    N = state.n_atoms
    plus = spin_coherent_state(N, np.pi / 2, 0.0).ground
    minus = spin_coherent_state(N, np.pi / 2, np.pi).ground
    g, jz = state.ground, _ground_jz(N)

    def score(t):
        rotated = np.exp(1j * t * jz) * g
        return 0.5 * (abs(np.vdot(plus, rotated)) + abs(np.vdot(minus, rotated))) ** 2

    return _maximize_over_angle(score, N)
