"""Frame and Gram utilities shared by the design and selection engines.

A frame is an ``m x n`` numpy array (real or complex) whose columns are the
frame vectors.  Design routines keep the columns at unit Euclidean norm.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


class FrameError(ValueError):
    """Raised for frames that do not satisfy an operation's preconditions."""


@dataclass
class GramSummary:
    coherence: float
    argmax_pair: tuple[int, int]
    frame_potential: float
    gram_eigenvalues: np.ndarray
    tightness_gap: float
    m: int
    n: int

    @property
    def frame_bounds(self) -> tuple[float, float]:
        """Lower and upper frame bounds (smallest and largest eigenvalue)."""
        return float(self.gram_eigenvalues.min()), float(self.gram_eigenvalues.max())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmax_pair"] = list(self.argmax_pair)
        d["gram_eigenvalues"] = [float(v) for v in self.gram_eigenvalues]
        return d


def is_complex(frame: np.ndarray) -> bool:
    return np.iscomplexobj(frame)


def normalize_columns(frame: np.ndarray) -> np.ndarray:
    """Scale every column to unit Euclidean norm.

    Raises
    ------
    FrameError
        If a column is identically zero.
    """
    frame = np.asarray(frame)
    norms = np.linalg.norm(frame, axis=0)
    if np.any(norms == 0):
        raise FrameError("degenerate column")
    return frame / norms


def gram(frame: np.ndarray) -> np.ndarray:
    return frame.conj().T @ frame


def _check_dims(frame: np.ndarray) -> None:
    if frame.ndim != 2 or frame.shape[0] == 0 or frame.shape[1] < 2:
        raise FrameError("invalid dimensions")


def coherence(frame: np.ndarray) -> GramSummary:
    """Mutual coherence of the column-normalized frame plus Gram diagnostics.

    The frame potential and the eigenvalues of ``F F^H`` are computed for the
    normalized frame as well, so ``sum(gram_eigenvalues) == n`` always holds.
    """
    frame = np.asarray(frame)
    _check_dims(frame)
    f = normalize_columns(frame)
    m, n = f.shape
    g = np.abs(gram(f))
    np.fill_diagonal(g, 0.0)
    flat = int(np.argmax(g))
    i, j = divmod(flat, n)
    if i > j:
        i, j = j, i
    g_full = np.abs(gram(f)) ** 2
    eig = np.linalg.eigvalsh(f @ f.conj().T)
    eig = np.clip(eig, 0.0, None)
    ratio = n / m
    return GramSummary(
        coherence=float(g[i, j]),
        argmax_pair=(i, j),
        frame_potential=float(g_full.sum()),
        gram_eigenvalues=eig,
        tightness_gap=float(np.max(np.abs(eig - ratio)) / ratio),
        m=m,
        n=n,
    )


def mutual_coherence(frame: np.ndarray) -> float:
    """Just the coherence of a frame whose columns are already unit norm."""
    g = np.abs(gram(frame))
    np.fill_diagonal(g, 0.0)
    return float(g.max())


def column_correlations(frame: np.ndarray, i: int) -> np.ndarray:
    """Moduli of the inner products between column ``i`` and all other columns."""
    c = np.abs(frame.conj().T @ frame[:, i])
    return np.delete(c, i)


def frame_potential(frame: np.ndarray) -> float:
    return float(np.sum(np.abs(gram(frame)) ** 2))


def welch_bound(m: int, n: int, return_flag: bool = False):
    """Lower bound sqrt((n - m) / (m (n - 1))) on the coherence of n unit vectors in dimension m.

    With ``return_flag=True`` a second value tells whether ``n > m**2``, where the
    bound is known not to be attainable by complex frames and is only a reference.
    """
    if m < 1 or n < 1:
        raise FrameError("m and n must be positive")
    if n < m:
        raise FrameError(f"welch bound needs n >= m, got m={m}, n={n}")
    value = 0.0 if n == m else float(np.sqrt((n - m) / (m * (n - 1))))
    if return_flag:
        return value, n > m * m
    return value


def polar_retraction(frame: np.ndarray, alpha: float = 1.0, normalize: bool = True) -> np.ndarray:
    """Closest alpha-tight frame ``alpha * U V^H`` in Frobenius norm.

    With ``normalize=True`` (the default) the columns are rescaled to unit norm
    afterwards, which is how the design loop uses it.
    """
    frame = np.asarray(frame)
    m = frame.shape[0]
    u, s, vh = np.linalg.svd(frame, full_matrices=False)
    if s.size < m or s[-1] <= s[0] * max(frame.shape) * np.finfo(float).eps:
        raise FrameError("rank deficient, retraction undefined")
    out = alpha * (u @ vh)
    if normalize:
        out = normalize_columns(out)
    return out


def unit_modulus(frame: np.ndarray) -> np.ndarray:
    """Project entries onto modulus ``m**-0.5`` keeping the phases."""
    frame = np.asarray(frame)
    m = frame.shape[0]
    mag = np.abs(frame)
    if np.any(mag == 0):
        # a zero entry has no phase; pick the positive real axis
        frame = np.where(mag == 0, 1.0, frame)
        mag = np.abs(frame)
    return frame / mag / np.sqrt(m)


def fp_upper_bound(m: int, n: int, gamma: float) -> float:
    """Upper bound on the frame potential of a frame with coherence gamma times the Welch bound."""
    if gamma < 1:
        raise FrameError("below Welch bound, impossible")
    rho = n / m
    g2 = gamma * gamma
    return (n * n / m) * (g2 - (g2 - 1.0) / rho)


def papr(frame: np.ndarray) -> np.ndarray:
    """Per-column peak-to-average power ratio ``max |f_k|^2 / mean |f_k|^2``."""
    p = np.abs(np.asarray(frame)) ** 2
    return p.max(axis=0) / p.mean(axis=0)
