"""
Independent checks
==================

Three things the optimizer relies on, checked without it: the control
algebra is the full su(2N+1), the reduced model agrees with a brute-force
3^N simulation, and weak dressing reduces to one-axis twisting.
"""
# %%
import numpy as np

from rydberg_dicke import ControlWaveform, SystemParams, build_control, build_drift, evolve, fidelity
from rydberg_dicke.hilbert import spin_coherent_state
from rydberg_dicke.verification import (
    equatorial_cat_fidelity,
    full_space_evolve,
    lie_closure_dimension,
    oat_evolve,
)

for N in range(2, 6):
    p = SystemParams.from_mhz(N, 5, 2.5, 12.5, 1.25)
    report = lie_closure_dimension([build_drift(p), build_control(p, 0.0), build_control(p, np.pi / 2)])
    print(f"N={N}: {report}")

# without the laser the algebra collapses
p = SystemParams.from_mhz(3, 0, 2.5, 12.5, 1.25)
print("no laser:", lie_closure_dimension([build_drift(p), build_control(p, 0.0), build_control(p, np.pi / 2)]))

# %%
rng = np.random.default_rng(0)
p = SystemParams.from_mhz(3, 5, 2.5, 12.5, 1.25)
wf = ControlWaveform(rng.uniform(-np.pi, np.pi, 12), 0.05)
psi0 = spin_coherent_state(3, 1.0, 0.3)
print("reduced vs 3^N infidelity:", 1 - fidelity(evolve(wf, p, psi0), full_space_evolve(wf, p, psi0)))

# %%
# one-axis twisting for pi/kappa gives an equatorial cat
for N in (4, 7, 10):
    out = oat_evolve(N, 1.0, np.pi, spin_coherent_state(N, np.pi / 2))
    f, azimuth = equatorial_cat_fidelity(out)
    print(f"N={N}: equatorial cat fidelity {f:.12f} (axis at {azimuth:.3f} rad)")
