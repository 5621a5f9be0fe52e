"""
The symmetric atom-laser space
==============================

N atoms that all see the same fields and blockade each other stay in a
(2N+1)-dimensional space: Dicke states |g,n> with no Rydberg atom, and
|e,n> with exactly one.
"""
# %%
import numpy as np

from rydberg_dicke import hilbert as hs

N = 3
for k, label in enumerate(hs.all_labels(N)):
    print(k, label)

# %%
# collective spin operators act inside each manifold separately
jx, jy, jz = (hs.collective_spin(N, a) for a in "xyz")
print("[Jx, Jy] = i Jz:", np.allclose(jx @ jy - jy @ jx, 1j * jz))
print("Jz diagonal:", np.diag(jz).real)

# %%
# a spin coherent state on the equator and the cat target
coh = hs.spin_coherent_state(N, np.pi / 2, 0.0)
cat = hs.cat_state(N)
print("populations of the coherent state:", np.round(coh.populations(), 4))
print("overlap with the cat:", hs.fidelity(coh, cat))
