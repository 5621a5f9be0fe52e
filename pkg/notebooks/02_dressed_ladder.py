"""
Dressed states and the effective nonlinearity
=============================================

The Rydberg laser mixes |g,n> with |e,n-1>.  Each pair diagonalizes in
closed form, and the ground-like branch picks up an energy that is not
linear in n.  Its curvature kappa is what turns rotations into entanglement.
"""
# %%
import numpy as np

from rydberg_dicke import hamiltonian as ham
from rydberg_dicke.hilbert import BasisLabel, Manifold

p = ham.SystemParams.from_mhz(7, omega_r=5, delta_r=2.5, omega_uw=12.5, delta_uw=1.25)
basis = ham.dressed_basis(p)
for n in range(p.n_atoms + 1):
    k = basis.index(BasisLabel(Manifold.GROUND, n))
    print(f"|g~,{n}>  E/2pi = {basis.energies[k] / (2 * np.pi):+.4f} MHz")

# %%
# exact vs weak-dressing nonlinearity, and the matching time scale
for delta in (2.5, 15.0, 50.0):
    q = p.replace(delta_r=2 * np.pi * delta)
    ke, kw = ham.kappa_exact(q), ham.kappa_weak(q)
    print(f"delta_r/2pi = {delta:5.1f} MHz  kappa_exact/2pi = {ke / 2 / np.pi:+.5f}  "
          f"kappa_weak/2pi = {kw / 2 / np.pi:+.5f}  pi/|kappa| = {np.pi / abs(ke):.3f} us")

# %%
# blockade radius for C6/h = 610 GHz um^6 at a 5 MHz Rabi frequency
print("R_b = %.2f um" % ham.blockade_radius(610, 2 * np.pi * 5))

# %%
# how far the microwave is from the adiabatic regime
for name, q in [("strong dressing", p), ("weak dressing", ham.SystemParams.from_mhz(7, 5, 15, 0.1, 0.4))]:
    print(name, "adiabaticity parameter:", ham.adiabaticity_parameter(q))
