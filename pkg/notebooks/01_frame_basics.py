# %% [markdown]
# # Frame basics
#
# Coherence, the Welch bound, the frame potential and the polar retraction
# on a random unit-norm frame.

# %%
import numpy as np

from incoherent_frames import coherence, frame_potential, normalize_columns, polar_retraction, welch_bound

rng = np.random.default_rng(0)
m, n = 6, 16
F = normalize_columns(rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))

# %%
g = coherence(F)
print(f"coherence {g.coherence:.4f}, Welch bound {welch_bound(m, n):.4f}")
print(f"frame potential {frame_potential(F):.3f}, tight-frame minimum n^2/m = {n * n / m:.3f}")

# %% [markdown]
# The polar retraction maps the frame to the nearest tight frame (then
# renormalizes the columns), which pulls the frame potential to its minimum.

# %%
T = polar_retraction(F)
print(f"after retraction: coherence {coherence(T).coherence:.4f}, FP {frame_potential(T):.3f}")
