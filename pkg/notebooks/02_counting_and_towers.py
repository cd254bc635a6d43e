# %% [markdown]
# # Counting conserved observables and building them
#
# Three independent routes give the Hermitian solutions of
# `eta H = H^dagger eta`: a direct nullspace solve, dyads of left
# eigenvectors (with Jordan chains at EPs), and the tower
# `eta_1, eta_1 H, eta_1 H^2, ...` grown from one seed.

# %%
from __future__ import annotations

import numpy as np

from intertwiners import SpinModelParams, build_pt_spin, parity
from intertwiners.intertwine import eta_from_spectrum, recursive_tower, solve_relation
from intertwiners.spectral import eig_biorthogonal

# %% [markdown]
# An n-level Hamiltonian with a real or conjugate-paired spectrum has n of
# them when it has no diabolic degeneracy. Each diabolic eigenvalue of
# multiplicity k contributes k^2 instead of k.

# %%
for D in range(2, 7):
    counts = [len(solve_relation(build_pt_spin(SpinModelParams(D, 1.0, g))[0])) for g in (0.5, 1.0, 1.5)]
    print(f"D={D}: counts below / at / above the EP = {counts}")
print("diag(a,a,b):", len(solve_relation(np.diag([1.0, 1.0, 2.0]))))
print("identity(3):", len(solve_relation(np.eye(3))))

# %% [markdown]
# The three routes span the same space.

# %%
h, _ = build_pt_spin(SpinModelParams(4, 1.0, 0.7))
oracle = solve_relation(h)
spectral = eta_from_spectrum(eig_biorthogonal(h))
tower = recursive_tower(parity(4), h)
print("span residual spectral vs nullspace:", oracle.span_residual(spectral))
print("span residual tower vs nullspace:   ", oracle.span_residual(tower))

# %% [markdown]
# The tower products are polynomial in `gamma`, so they pass smoothly
# through the EP even though the eigenvectors do not.

# %%
for gamma in (0.999, 1.0, 1.001):
    t = recursive_tower(parity(3), build_pt_spin(SpinModelParams(3, 1.0, gamma))[0])
    print(f"gamma={gamma}: count={len(t)}  ||eta_3||={np.linalg.norm(t.etas[2]):.6f}")
