# %% [markdown]
# # Independent oracles
#
# The interior-point solver is cross-checked against a projected-subgradient
# oracle on the per-column programs, and harmonic selection against brute
# force.

# %%
import numpy as np

from incoherent_frames import VariantSpec, initialize, trust_radius
from incoherent_frames.conic import solve
from incoherent_frames.oracle import subgradient_solve
from incoherent_frames.subproblem import build_sidco_subproblem

rng = np.random.default_rng(1)
for kind in ["real", "complex", "unital", "nonneg_complex"]:
    v = VariantSpec(kind)
    H = initialize(4, 8, v, rng)
    T = trust_radius(H, 0)
    sol = solve(build_sidco_subproblem(H, 0, v, T))
    val = subgradient_solve(H, 0, v, T)
    print(f"{kind:15s} solver {sol.objective_value:.9f} oracle {val:.9f} "
          f"dual bound {sol.dual_objective:.9f}")
