"""
Optimizing microwave phases for a cat state
===========================================

Strong dressing, seven atoms, 28 piecewise-constant phase steps over 1 us.
The optimizer maximizes the overlap with the dressed cat
(|g~,0> + |g~,7>)/sqrt(2), starting from a dressed coherent state.
"""
# %%
import numpy as np

from rydberg_dicke import (
    OptimizeOptions,
    SystemParams,
    dressed_basis,
    dressed_target,
    optimize,
    spin_coherent_state,
)

N = 7
p = SystemParams.from_mhz(N, omega_r=5, delta_r=2.5, omega_uw=12.5, delta_uw=1.25)
basis = dressed_basis(p)
coherent = spin_coherent_state(N, np.pi / 2).ground
cat = np.zeros(N + 1)
cat[[0, N]] = 2**-0.5
psi0 = dressed_target(p, coherent, basis)
target = dressed_target(p, cat, basis)

# %%
opts = OptimizeOptions.for_duration(28, 1.0, restarts=5, fidelity_goal=0.999, seed=1)
res = optimize(p, psi0, target, opts)
print("best fidelity:", res.best_fidelity)
print("per restart:", np.round(res.fidelity_per_restart, 5))
print("phases (rad):", np.round(res.best_waveform.phases, 3))

# %%
# dressed-basis populations at the end of the pulse
from rydberg_dicke import evolve, to_dressed

final = to_dressed(evolve(res.best_waveform, p, psi0), basis)
for label, pop in zip(basis.labels, np.abs(final) ** 2):
    if pop > 1e-3:
        print(label, round(float(pop), 4))
