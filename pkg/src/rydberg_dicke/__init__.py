"""Optimal phase control of Dicke-state superpositions in Rydberg-blockaded ensembles.

The blockaded, permutation-symmetric ensemble maps onto a finite
Jaynes-Cummings ladder; piecewise-constant microwave phases steer it from a
fiducial state to any superposition of dressed Dicke states.
"""
from .hilbert import (
    BasisLabel,
    DickeVector,
    Manifold,
    basis_index,
    basis_label,
    cat_state,
    collective_spin,
    dicke_state,
    fidelity,
    spin_coherent_state,
)
from .hamiltonian import (
    DressedBasis,
    SystemParams,
    adiabaticity_parameter,
    blockade_radius,
    build_control,
    build_drift,
    dressed_basis,
    dressed_target,
    kappa_exact,
    kappa_weak,
    from_dressed,
    to_dressed,
)
from .propagation import ControlWaveform, evolve, fidelity_and_gradient, step_propagator
from .grape import (
    OptimizationResult,
    OptimizeOptions,
    Regime,
    optimize,
    optimize_dressed_ground,
    speed_limit_estimate,
    sweep_landscape,
)
from .verification import (
    LieClosureReport,
    full_space_evolve,
    lie_closure_dimension,
    oat_evolve,
)

__version__ = "0.1.0"
