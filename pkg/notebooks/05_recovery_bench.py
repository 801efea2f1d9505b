# %% [markdown]
# # Sparse recovery with OMP
#
# Mean support error of orthogonal matching pursuit on noisy s-sparse
# signals, for a designed frame and a random one.  All frames see the same
# signals and noise (common random numbers).

# %%
from incoherent_frames import SidcoConfig, VariantSpec, run
from incoherent_frames.recovery import random_frame, run_sweep

m, n = 12, 48
designed = run(m, n, VariantSpec("complex"), SidcoConfig(max_iterations=60, rng_seed=0)).best_frame
rand = random_frame(m, n, True, seed=12345)

s_values = range(1, 7)
for name, A in [("designed", designed), ("random", rand)]:
    res = run_sweep(A, s_values, snr_db=15.0, trials=2000, seed=0)
    print(f"{name:9s}", [round(float(e), 3) for e in res.mean_support_error])
