# %% [markdown]
# # Sequential decorrelation (SIDCO)
#
# Each sweep replaces one column at a time by the solution of a small convex
# program: minimize the largest correlation with the other columns while
# staying inside a trust region around the current column.  The variants add
# unit-modulus, nonnegativity or sparsity constraints.

# %%
from incoherent_frames import SidcoConfig, VariantSpec, run, welch_bound
from incoherent_frames.frame import coherence, papr

m, n = 4, 8
for kind in ["real", "complex", "nonneg_real"]:
    rep = run(m, n, VariantSpec(kind), SidcoConfig(max_iterations=200, rng_seed=0))
    print(f"{kind:12s} coherence {rep.best_coherence:.5f}  (Welch {welch_bound(m, n):.5f})")

# %% [markdown]
# Unital frames: every entry has modulus m^{-1/2}, so the peak-to-average
# power ratio of each column is exactly one.

# %%
rep = run(6, 12, VariantSpec("unital", gamma=0.01), SidcoConfig(max_iterations=200, rng_seed=0))
print("unital coherence", round(rep.best_coherence, 5), "max PAPR", papr(rep.best_frame).max())

# %% [markdown]
# Sparse frames: an l1 phase finds a support, a fixed-support polishing phase
# then decorrelates on that support.  Starting from a general design works
# best.

# %%
base = run(8, 16, VariantSpec("complex"), SidcoConfig(max_iterations=200, rng_seed=0))
sp = run(8, 16, VariantSpec("sparse_complex", lam=1.8), SidcoConfig(max_iterations=200, rng_seed=0),
         initial_frame=base.best_frame)
zeros = (sp.best_frame == 0).mean()
print(f"sparse: {zeros:.0%} zeros, coherence {sp.best_coherence:.4f} vs dense {base.best_coherence:.4f}")

# %% [markdown]
# Coherence never increases within a sweep; `trajectory` and `sweep_start`
# record the value after and before each sweep.

# %%
import numpy as np

print("largest per-sweep increase:", np.max(np.subtract(base.trajectory, base.sweep_start)))
