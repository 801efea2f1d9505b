# %% [markdown]
# # Frame files and the command line
#
# Frames are stored as JSON with exact round-trip doubles.  The same
# operations are available from the `incoherent-frames` command.

# %%
import subprocess
import tempfile
from pathlib import Path

import numpy as np

from incoherent_frames.io import load_frame, save_frame

out = Path(tempfile.mkdtemp())
F = np.exp(2j * np.pi * np.random.default_rng(0).random((3, 5))) / np.sqrt(3)
save_frame(out / "f.json", F, {"note": "demo"})
G, meta = load_frame(out / "f.json")
print("bit exact:", np.array_equal(F, G), meta)

# %%
cmds = [
    ["design", "--variant", "c", "--m", "4", "--n", "8", "--iters", "100", "--seeds", "2",
     "--out", str(out / "design")],
    ["analyze", str(out / "design" / "frame.json"), "--compact"],
    ["select", "--source", "fourier", "--m", "13", "--n", "40", "--runs", "10", "--out", str(out / "select")],
]
for c in cmds:
    r = subprocess.run(["incoherent-frames", *c], capture_output=True, text=True)
    print("$ incoherent-frames", " ".join(c), "->", r.returncode)
    print(r.stdout[:400])
