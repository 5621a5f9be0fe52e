"""
Fidelity landscape over detuning and run time
=============================================

A small version of the (delta_r, T) scan for a six-atom cat.  The best
fidelity rises to a plateau once T passes a threshold, and the threshold
moves out as the laser detuning grows because kappa shrinks.  The
microwave detuning follows delta_r/2.
"""
# %%
import numpy as np

from rydberg_dicke import OptimizeOptions, SystemParams, kappa_exact, sweep_landscape

N, s = 6, 25
base = SystemParams.from_mhz(N, omega_r=5, delta_r=1, omega_uw=2.5, delta_uw=0.5)
cat = np.zeros(N + 1)
cat[[0, N]] = 2**-0.5
delta_r = 2 * np.pi * np.array([1.0, 5.0])
times = np.array([0.5, 1.0, 2.0, 4.0])
opts = OptimizeOptions(steps=s, dt=1.0, restarts=4, max_iterations=600, fidelity_goal=0.999, seed=10)

land = sweep_landscape(base, cat, s, delta_r, times, opts, delta_uw_ratio=0.5, initial_coeffs=np.eye(N + 1)[0])

# %%
print("delta_r/2pi  " + "  ".join(f"T={t:4.1f}" for t in times))
for dr, row in zip(delta_r, land.fidelity):
    print(f"{dr / 2 / np.pi:8.2f}    " + "  ".join(f"{f:.4f}" for f in row))
print("threshold (F >= 0.99):", land.threshold_times(0.99))
print("pi/|kappa|:", [round(np.pi / abs(kappa_exact(base.replace(delta_r=d))), 3) for d in delta_r])
