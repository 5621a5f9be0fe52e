"""
Weak dressing: control inside the dressed ground manifold
=========================================================

With a weak, slow microwave the state never leaves the dressed ground
states, so only 2N phase steps are needed.  The price is time: the run
has to last a few times pi/|kappa|.
"""
# %%
import warnings

import numpy as np

from rydberg_dicke import OptimizeOptions, SystemParams, optimize_dressed_ground, spin_coherent_state
from rydberg_dicke.grape import speed_limit_estimate

N = 7
cat = np.zeros(N + 1)
cat[[0, N]] = 2**-0.5
coherent = spin_coherent_state(N, np.pi / 2).ground
opts = OptimizeOptions.for_duration(2 * N, 25.0, restarts=10, fidelity_goal=0.99, seed=9)

# %%
# the sign of the microwave detuning matters: compare both
for delta_uw in (+0.4, -0.4):
    p = SystemParams.from_mhz(N, omega_r=5, delta_r=15, omega_uw=0.1, delta_uw=delta_uw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = optimize_dressed_ground(p, cat, opts, initial_coeffs=coherent)
    print(f"delta_uw/2pi = {delta_uw:+.1f} MHz: best F = {res.best_fidelity:.5f}, "
          f"peak leakage = {res.peak_leakage:.2e}")

print("pi/|kappa| =", round(speed_limit_estimate(p), 2), "us")
