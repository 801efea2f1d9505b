"""Sparse recovery benchmark: OMP on designed versus random measurement frames.

Signals are ``s``-sparse with a uniformly random support and standard
Gaussian nonzeros (complex for complex frames), normalized to unit norm.
Measurements are ``y = A x + noise`` with white Gaussian noise scaled per
trial so that ``10 log10(||A x||^2 / E||noise||^2)`` equals the target SNR.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

CSV_VERSION = "v1"
SNR_CONVENTION = "snr_db = 10*log10(||A x||^2 / E||noise||^2), per trial, white gaussian noise"


def random_frame(m: int, n: int, complex_field: bool = True, seed=None) -> np.ndarray:
    """Gaussian frame scaled to squared Frobenius norm ``n`` (unit columns on average)."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    if complex_field:
        A = A + 1j * rng.standard_normal((m, n))
    return A * np.sqrt(n) / np.linalg.norm(A)


@dataclass
class OmpResult:
    x: np.ndarray
    support: list
    singular: bool = False


def omp(frame: np.ndarray, y: np.ndarray, s: int, return_info: bool = False):
    """Orthogonal matching pursuit with an incrementally updated QR factorization.

    Each step picks the column with the largest normalized correlation with
    the residual, appends it to ``Q R`` by Gram-Schmidt (with one
    reorthogonalization) and refits the coefficients.  If the new column is
    numerically dependent on the selected ones the iteration stops early and
    ``OmpResult.singular`` is set.
    """
    A = np.asarray(frame)
    m, n = A.shape
    if s > m:
        raise ValueError("sparsity s exceeds the number of measurements m")
    cplx = np.iscomplexobj(A) or np.iscomplexobj(y)
    dtype = complex if cplx else float
    norms = np.linalg.norm(A, axis=0)
    x = np.zeros(n, dtype=dtype)
    Q = np.zeros((m, s), dtype=dtype)
    R = np.zeros((s, s), dtype=dtype)
    support = []
    r = np.asarray(y, dtype=dtype).copy()
    ynorm = np.linalg.norm(r)
    singular = False
    if ynorm == 0:
        return OmpResult(x, support) if return_info else x
    coef = np.zeros(0, dtype=dtype)
    for k in range(s):
        corr = np.abs(A.conj().T @ r) / norms
        corr[support] = -1.0
        j = int(np.argmax(corr))
        a = A[:, j].astype(dtype)
        proj = Q[:, :k].conj().T @ a
        q = a - Q[:, :k] @ proj
        proj2 = Q[:, :k].conj().T @ q
        q = q - Q[:, :k] @ proj2
        proj = proj + proj2
        rho = np.linalg.norm(q)
        if rho <= 1e-10 * norms[j]:
            singular = True
            break
        Q[:, k] = q / rho
        R[:k, k] = proj
        R[k, k] = rho
        support.append(j)
        coef = solve_triangular(R[:k + 1, :k + 1], Q[:, :k + 1].conj().T @ y)
        r = y - Q[:, :k + 1] @ (Q[:, :k + 1].conj().T @ y)
        if np.linalg.norm(r) <= 1e-14 * ynorm:
            break
    x[support] = coef[:len(support)]
    return OmpResult(x, support, singular) if return_info else x


def omp_batch(frame: np.ndarray, Y: np.ndarray, s: int) -> np.ndarray:
    """OMP for many measurement vectors at once (columns of ``Y``); same steps as :func:`omp`.

    Returns the ``(n, trials)`` coefficient matrix.
    """
    A = np.asarray(frame)
    m, n = A.shape
    if s > m:
        raise ValueError("sparsity s exceeds the number of measurements m")
    Y = np.asarray(Y)
    T = Y.shape[1]
    dtype = complex if (np.iscomplexobj(A) or np.iscomplexobj(Y)) else float
    norms = np.linalg.norm(A, axis=0)
    Yt = Y.T.astype(dtype)  # (T, m)
    Q = np.zeros((T, m, s), dtype=dtype)
    R = np.zeros((T, s, s), dtype=dtype)
    sel = np.zeros((T, s), dtype=np.int64)
    active = np.linalg.norm(Yt, axis=1) > 0
    steps = np.zeros(T, dtype=np.int64)
    Rres = Yt.copy()
    ar = np.arange(T)
    AH = A.conj().T
    for k in range(s):
        corr = np.abs(Rres @ AH.T) / norms  # (T, n)
        if k:
            corr[ar[:, None], sel[:, :k]] = -1.0
        j = np.argmax(corr, axis=1)
        a = A[:, j].T.astype(dtype)  # (T, m)
        Qk = Q[:, :, :k]
        proj = np.einsum("tmk,tm->tk", Qk.conj(), a)
        q = a - np.einsum("tmk,tk->tm", Qk, proj)
        proj2 = np.einsum("tmk,tm->tk", Qk.conj(), q)
        q = q - np.einsum("tmk,tk->tm", Qk, proj2)
        proj = proj + proj2
        rho = np.linalg.norm(q, axis=1)
        ok = active & (rho > 1e-10 * norms[j])
        active = ok
        rho_safe = np.where(ok, rho, 1.0)
        Q[ok, :, k] = q[ok] / rho_safe[ok, None]
        R[ok, :k, k] = proj[ok]
        R[ok, k, k] = rho[ok]
        sel[ok, k] = j[ok]
        steps[ok] = k + 1
        Qa = Q[:, :, :k + 1]
        Rres = Yt - np.einsum("tmk,tk->tm", Qa, np.einsum("tmk,tm->tk", Qa.conj(), Yt))
        rn = np.linalg.norm(Rres, axis=1)
        active = active & (rn > 1e-14 * np.linalg.norm(Yt, axis=1))
    X = np.zeros((n, T), dtype=dtype)
    for t in range(T):
        k = steps[t]
        if k == 0:
            continue
        c = solve_triangular(R[t, :k, :k], Q[t, :, :k].conj().T @ Yt[t])
        X[sel[t, :k], t] = c
    return X


@dataclass
class RecoveryTask:
    frame: np.ndarray
    sparsity: int
    snr_db: float = 15.0
    trials: int = 100_000
    rng_seed: int = 0

    def __post_init__(self):
        if self.sparsity > self.frame.shape[0]:
            raise ValueError("sparsity s exceeds the number of measurements m")
        if self.sparsity < 1 or self.trials < 1:
            raise ValueError("need s >= 1 and trials >= 1")


@dataclass
class RecoveryResult:
    sparsity: list = field(default_factory=list)
    mean_support_error: list = field(default_factory=list)
    mean_squared_error: list = field(default_factory=list)
    trials: list = field(default_factory=list)
    empirical_snr_db: list = field(default_factory=list)

    def extend(self, other: "RecoveryResult") -> "RecoveryResult":
        for name in ("sparsity", "mean_support_error", "mean_squared_error", "trials", "empirical_snr_db"):
            getattr(self, name).extend(getattr(other, name))
        return self

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# incoherent-frames recovery bench {CSV_VERSION}; {SNR_CONVENTION}\n")
        buf.write("s,mean_support_error,mean_squared_error,trials\n")
        for s, se, mse, t in zip(self.sparsity, self.mean_support_error, self.mean_squared_error, self.trials):
            buf.write(f"{s},{se:.10g},{mse:.10g},{t}\n")
        return buf.getvalue()


def _trial_rng(seed: int, s: int) -> np.random.Generator:
    # every (seed, s) gets its own stream, independent of how the work is split
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(s)]))


def draw_problems(m: int, n: int, s: int, trials: int, snr_db: float, frame: np.ndarray, seed: int,
                  complex_field: bool):
    """Signals, supports and noisy measurements for one sparsity level."""
    rng = _trial_rng(seed, s)
    supports = np.argsort(rng.random((trials, n)), axis=1)[:, :s]
    vals = rng.standard_normal((trials, s))
    if complex_field:
        vals = vals + 1j * rng.standard_normal((trials, s))
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    X = np.zeros((n, trials), dtype=complex if complex_field else float)
    X[supports.T, np.arange(trials)] = vals.T
    clean = frame @ X
    noise = rng.standard_normal((m, trials))
    if complex_field:
        noise = (noise + 1j * rng.standard_normal((m, trials))) / np.sqrt(2)
    # E||noise||^2 = m sigma^2 = ||A x||^2 / 10^(snr/10)
    sigma = np.linalg.norm(clean, axis=0) / np.sqrt(m * 10 ** (snr_db / 10))
    noise = noise * sigma
    return X, supports, clean, noise


def run_bench(task: RecoveryTask, chunk: int = 5000) -> RecoveryResult:
    """Mean support error and squared error of OMP for one sparsity level."""
    A = np.asarray(task.frame)
    m, n = A.shape
    s = task.sparsity
    cplx = np.iscomplexobj(A)
    X, supports, clean, noise = draw_problems(m, n, s, task.trials, task.snr_db, A, task.rng_seed, cplx)
    Y = clean + noise
    sup_err = 0.0
    sq_err = 0.0
    for a in range(0, task.trials, chunk):
        b = min(a + chunk, task.trials)
        Xh = omp_batch(A, Y[:, a:b], s)
        true = np.zeros((n, b - a), dtype=bool)
        true[supports[a:b].T, np.arange(b - a)] = True
        est = Xh != 0
        sup_err += 0.5 * np.sum(true & ~est) + 0.5 * np.sum(est & ~true)
        sq_err += float(np.sum(np.abs(X[:, a:b] - Xh) ** 2))
    emp = 10 * np.log10(np.sum(np.abs(clean) ** 2) / np.sum(np.abs(noise) ** 2))
    return RecoveryResult([s], [sup_err / task.trials], [sq_err / task.trials], [task.trials], [float(emp)])


def run_sweep(frame: np.ndarray, s_values, snr_db: float = 15.0, trials: int = 100_000,
              seed: int = 0) -> RecoveryResult:
    """:func:`run_bench` over several sparsity levels with common random numbers across frames."""
    out = RecoveryResult()
    for s in s_values:
        out.extend(run_bench(RecoveryTask(frame, int(s), snr_db, trials, seed)))
    return out
