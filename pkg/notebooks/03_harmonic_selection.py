# %% [markdown]
# # Incoherent row selection from unital matrices
#
# Choosing m rows of an n x n DFT (or Hadamard) matrix gives an m x n frame
# with unit-modulus entries.  Its coherence depends only on the chosen index
# set, through a linear operator acting on the row indicator.

# %%
from incoherent_frames import CoherenceOperator, HarmonicConfig, select_rows, welch_bound
from incoherent_frames.oracle import exhaustive_select

op = CoherenceOperator("fourier", 40)
rep = select_rows(op, 13, HarmonicConfig(runs=50, rng_seed=0), return_report=True)
print("pattern", list(rep.pattern.indices))
print(f"coherence {rep.coherence:.4f}, Welch {welch_bound(13, 40):.4f}")

# %% [markdown]
# Small cases can be checked against exhaustive enumeration.

# %%
op16 = CoherenceOperator("fourier", 16)
for m in range(2, 9):
    _, exact = exhaustive_select(op16, m)
    _, found = select_rows(op16, m, HarmonicConfig(runs=20, rng_seed=0))
    print(m, round(exact, 6), round(found, 6))

# %% [markdown]
# Hadamard rows: the (28, 64) selection reaches coherence 1/7.

# %%
op64 = CoherenceOperator("hadamard", 64)
pat, c = select_rows(op64, 28, HarmonicConfig(runs=20, rng_seed=0))
print(c, 1 / 7)
