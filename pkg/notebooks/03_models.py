# %% [markdown]
# # Model Hamiltonians
#
# Spin models, their Hatano-Nelson rotation, the coupled-resonator circuit
# and the two-site dimer. Each builder also returns the symmetry it carries.

# %%
from __future__ import annotations

import numpy as np

from intertwiners import CircuitParams, SpinModelParams, build_circuit, build_dimer, build_hatano_nelson, build_pt_spin
from intertwiners.intertwine import verify_relation
from intertwiners.spectral import classify_degeneracies, spectrum_symmetry

np.set_printoptions(precision=3, suppress=True)

# %% [markdown]
# Rotating the spin model about `S_x` turns the imaginary on-site term into
# asymmetric hopping. The rotated parity seed is still an intertwiner.

# %%
hn = build_hatano_nelson(SpinModelParams(4, 1.0, 0.6))
print(hn.matrix)
print("seed residual:", verify_relation(hn.eta1, hn.matrix))

# %% [markdown]
# The circuit has two exceptional points. Between them the spectrum is
# complex; past the second it is purely imaginary in pairs.

# %%
mu = 0.5
p = CircuitParams(0.0, mu)
print(f"gamma_PT={p.gamma_pt:.4f} gamma_0={p.gamma0:.4f}")
for g in (0.3, p.gamma_pt, 1.2, p.gamma0, 3.0):
    h, eta1, _ = build_circuit(CircuitParams(g, mu))
    rep = classify_degeneracies(h)
    print(f"gamma={g:.4f}  eps={np.round(rep.values(), 3)}  EPs={len(rep.exceptional)}  seed residual={verify_relation(eta1, h):.0e}")

# %% [markdown]
# The dimer carries PT, anti-PT and chiral symmetry at once.

# %%
h2, syms = build_dimer(1.0, 0.4)
print([s.kind for s in syms])
print([s.kind for s in spectrum_symmetry(np.linalg.eigvals(h2))])
