# %% [markdown]
# # Spectra, degeneracies and exceptional points
#
# The spin-1 model `H = J S_x + i gamma S_z` has real eigenvalues for
# `gamma < J`, a third-order exceptional point at `gamma = J`, and a
# complex-conjugate pair beyond it.

# %%
from __future__ import annotations

import numpy as np

from intertwiners import SpinModelParams, build_pt_spin
from intertwiners.spectral import classify_degeneracies, eig_biorthogonal, jordan_chain, spectrum_symmetry

np.set_printoptions(precision=4, suppress=True)

# %%
for gamma in (0.0, 0.5, 0.99, 1.0, 1.5):
    h, _ = build_pt_spin(SpinModelParams(3, 1.0, gamma))
    rep = classify_degeneracies(h)
    kinds = ", ".join(f"{c.kind}({c.algebraic},{c.geometric})" for c in rep.clusters)
    print(f"gamma={gamma:4.2f}  eigenvalues={np.round(rep.values(), 4)}  {kinds}")

# %% [markdown]
# Away from the EP the left and right eigenvectors form a biorthogonal
# basis. Each vector has unit norm, so the overlaps `<L_k|R_k>` shrink as
# the EP approaches; that is the usual signature of eigenvector coalescence.

# %%
for gamma in (0.2, 0.8, 0.99, 0.9999):
    spec = eig_biorthogonal(build_pt_spin(SpinModelParams(3, 1.0, gamma))[0])
    dev = np.max(np.abs(spec.resolution_of_identity() - np.eye(3)))
    print(f"gamma={gamma:<7} |<L|R>|={np.abs(spec.overlaps)}  identity deviation={dev:.1e}")

# %% [markdown]
# At the EP there is a single eigenvector. The Jordan chain fills the space.

# %%
h_ep, _ = build_pt_spin(SpinModelParams(3, 1.0, 1.0))
chain = jordan_chain(h_ep, 0.0)
print("chain vectors (columns):\n", chain.vectors)
print("chain residuals:", chain.residuals(h_ep))
print("||H^3|| =", np.linalg.norm(np.linalg.matrix_power(h_ep, 3)))

# %% [markdown]
# The spectrum alone fixes which antilinear symmetries are possible.

# %%
for label, eigs in {
    "real": [1, -1, 0],
    "line at -pi/4": [np.exp(-0.25j * np.pi), 2 * np.exp(-0.25j * np.pi)],
    "broken pair": [0.3 + 0.4j, 0.3 - 0.4j],
}.items():
    print(label, [(s.kind, None if s.phi is None else round(s.phi, 4)) for s in spectrum_symmetry(eigs)])
