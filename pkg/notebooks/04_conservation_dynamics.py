# %% [markdown]
# # Conservation under non-unitary evolution
#
# With `psi(t) = expm(-iHt) psi0` the norm is not conserved, but
# `<psi|eta|psi>` is whenever `eta H = H^dagger eta`.

# %%
from __future__ import annotations

import numpy as np

from intertwiners import SpinModelParams, build_dimer, build_pt_spin, parity
from intertwiners.dynamics import drift_report, passive, slow_mode_rates
from intertwiners.intertwine import recursive_tower, tower_products

rng = np.random.default_rng(1)
psi0 = rng.normal(size=3) + 1j * rng.normal(size=3)

# %% [markdown]
# Unbroken phase: everything stays bounded and double precision suffices.

# %%
h, _ = build_pt_spin(SpinModelParams(3, 1.0, 0.5))
rep = drift_report(h, recursive_tower(parity(3), h), psi0, 20.0)
print("norm range:", rep.norm_series.min(), rep.norm_series.max())
print("relative drift:", rep.max_relative_drift)

# %% [markdown]
# Broken phase: the norm grows like `exp(2 sinh(beta) t)`. Rounding errors
# are amplified by the same factor, so the float path flags an imaginary
# residue. Evolving in extended precision recovers exact conservation.

# %%
h, _ = build_pt_spin(SpinModelParams(3, 1.0, 1.7))
p = parity(3)
fl = drift_report(h, tower_products(p, h, 3), psi0, 20.0, 401)
mp = drift_report(h, tower_products(p, h, 3, dps=50), psi0, 20.0, 401, dps=50)
print(f"norm growth {mp.norm_series[-1] / mp.norm_series[0]:.2e}")
print("float:  drift", fl.max_relative_drift, "flagged", fl.flagged)
print("mpmath: drift", mp.max_relative_drift)

# %% [markdown]
# A passive system `H - i Gamma` only loses energy. Undoing the uniform
# decay recovers the conserved values, and the slowest decay rate drops
# as the loss grows past the EP.

# %%
for g in (0.6, 1.1, 1.5, 2.0, 3.0):
    h2, _ = build_dimer(1.0, g)
    print(f"gamma={g}: slow-mode rate {slow_mode_rates(passive(h2, g / 2))[0]:.4f}")
h2, _ = build_dimer(1.0, 0.6)
rep = drift_report(passive(h2, 0.3), recursive_tower(np.array([[0, 1], [1, 0]]), h2), [1, 0.2j], 20.0, gamma_shift=0.3)
print("rescaled drift:", rep.max_relative_drift, " final norm:", rep.norm_series[-1])
