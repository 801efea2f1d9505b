"""Incoherent row selection from unital matrices (Fourier, Hadamard, custom).

Selecting the rows ``K`` of an ``n x n`` unital matrix and normalizing by
``m**-0.5`` gives an ``m x n`` frame whose off-diagonal Gram entries are
linear in the indicator vector ``g = 1_K``:  ``G = op.rows @ g / m`` up to
the map from reduced rows back to index pairs.  The search combines an
iteratively reweighted l1 relaxation (IRL1), greedy support reduction and a
swap local search.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _combinatorics, conic
from .conic import ConeBlock, ConeProgram
from .frame import welch_bound

WEIGHT_RULES = ("one_minus_g", "inverse_magnitude", "one_minus_g_over_inf")


class SelectionError(ValueError):
    pass


def sylvester_hadamard(n: int) -> np.ndarray:
    """Sylvester-ordered Hadamard matrix, ``H[j, k] = (-1)**popcount(j & k)``."""
    if n < 1 or n & (n - 1):
        raise SelectionError(
            f"the built-in Hadamard construction supports n = 2^k (1, 2, 4, ..., 1024, ...), got n={n}; "
            "supply other orders as a custom matrix file")
    H = np.ones((1, 1))
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H


def fourier_matrix(n: int) -> np.ndarray:
    """Unnormalized DFT matrix ``exp(-2 pi i j k / n)``."""
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


@dataclass(frozen=True)
class SelectionPattern:
    """Sorted set of selected row indices out of ``n``."""

    n: int
    indices: tuple

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise SelectionError("pattern indices must be distinct")
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise SelectionError("pattern index out of range")
        object.__setattr__(self, "indices", idx)

    @staticmethod
    def from_indicator(g) -> "SelectionPattern":
        g = np.asarray(g)
        return SelectionPattern(g.size, tuple(np.flatnonzero(g > 0.5)))

    @property
    def m(self) -> int:
        return len(self.indices)

    def indicator(self) -> np.ndarray:
        g = np.zeros(self.n)
        g[list(self.indices)] = 1.0
        return g

    def array(self) -> np.ndarray:
        return np.array(self.indices, dtype=np.int64)

    def to_dict(self, source: str | None = None) -> dict:
        d = {"n": self.n, "indices": list(self.indices)}
        if source is not None:
            d["source"] = source
        return d

    def to_json(self, source: str | None = None) -> str:
        return json.dumps(self.to_dict(source))

    @staticmethod
    def from_json(text: str) -> "SelectionPattern":
        d = json.loads(text)
        return SelectionPattern(int(d["n"]), tuple(d["indices"]))


class CoherenceOperator:
    """Linear map from a selection indicator to the distinct Gram entries.

    Parameters
    ----------
    source : {"fourier", "hadamard", "custom"}
    n : int
        Order of the unital matrix (ignored for ``custom``).
    matrix : ndarray, optional
        The unital matrix for ``custom`` sources; rows are the selectable
        rows, columns the frame vectors.  Entries must share one modulus.

    Attributes
    ----------
    rows : ndarray, shape (r, n)
        Reduced rows; ``|rows @ 1_K|`` lists every distinct off-diagonal Gram
        modulus (times ``m``) of the selected frame.
    pairs : ndarray, shape (r, 2)
        A Gram index pair ``(i, j)`` represented by each reduced row.
    """

    def __init__(self, source: str, n: int | None = None, matrix: np.ndarray | None = None):
        if source == "fourier":
            if n is None or n < 2:
                raise SelectionError("fourier source needs n >= 2")
            self.matrix = fourier_matrix(n)
            d = np.arange(1, n // 2 + 1)
            # row d is the conjugate DFT row at frequency d: G[d, 0] = sum_k conj(F[k, d]) F[k, 0]
            self.rows = np.exp(2j * np.pi * np.outer(d, np.arange(n)) / n)
            self.pairs = np.stack([np.zeros_like(d), d], axis=1)
        elif source in ("hadamard", "custom"):
            if source == "hadamard" and matrix is None:
                matrix = sylvester_hadamard(n)
            if matrix is None:
                raise SelectionError("custom source needs a matrix")
            matrix = np.asarray(matrix)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise SelectionError("unital source matrix must be square")
            mag = np.abs(matrix)
            if mag.min() <= 0 or np.ptp(mag) > 1e-9 * mag.max():
                raise SelectionError("source entries must have constant magnitude")
            matrix = matrix / mag.flat[0]
            if source == "hadamard":
                if np.iscomplexobj(matrix) and np.abs(matrix.imag).max() > 0:
                    raise SelectionError("hadamard matrix must be real")
                matrix = matrix.real
                nn = matrix.shape[0]
                if not np.allclose(matrix @ matrix.T, nn * np.eye(nn), atol=1e-9):
                    raise SelectionError("hadamard matrix rows are not orthogonal")
            self.matrix = matrix
            self.rows, self.pairs = self._pair_rows(matrix)
        else:
            raise SelectionError(f"unknown source {source!r}")
        self.source = source
        self.n = self.matrix.shape[1]
        self._rows_ri = (np.ascontiguousarray(self.rows.real, dtype=float),
                         np.ascontiguousarray(self.rows.imag, dtype=float))

    @staticmethod
    def _pair_rows(matrix):
        n = matrix.shape[1]
        i, j = np.triu_indices(n, 1)
        prod = matrix[:, i].conj() * matrix[:, j]  # (rows, pairs)
        prod = prod.T
        # canonicalize phase (first entry real positive) and conjugation, then deduplicate
        prod = prod * (prod[:, :1].conj() / np.abs(prod[:, :1]))
        prod = np.where(np.abs(prod) == 0, 0, prod)
        key = np.round(np.concatenate([prod.real, prod.imag], axis=1), 10)
        keyc = np.round(np.concatenate([prod.real, -prod.imag], axis=1), 10)
        swap = np.array([tuple(a) > tuple(b) for a, b in zip(key, keyc)], dtype=bool)
        key[swap] = keyc[swap]
        _, first = np.unique(key, axis=0, return_index=True)
        first = np.sort(first)
        rows = prod[first]
        if not np.iscomplexobj(matrix):
            rows = rows.real
        return rows, np.stack([i[first], j[first]], axis=1)

    @property
    def num_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def balanced(self) -> bool:
        """True when every reduced row sums to zero (orthogonal columns)."""
        return bool(np.abs(self.rows.sum(axis=1)).max() < 1e-9 * self.n)

    def describe(self) -> str:
        return self.source if self.source != "custom" else f"custom({self.n})"

    def values(self, g: np.ndarray) -> np.ndarray:
        return self.rows @ g

    def frame(self, pattern: SelectionPattern) -> np.ndarray:
        """Materialized normalized frame ``M[K, :] / sqrt(m)``."""
        if pattern.n != self.n:
            raise SelectionError("pattern size does not match the operator")
        return self.matrix[list(pattern.indices), :] / np.sqrt(pattern.m)


def _as_pattern(pattern, n) -> SelectionPattern:
    if isinstance(pattern, SelectionPattern):
        return pattern
    return SelectionPattern(n, tuple(pattern))


def selection_coherence(op: CoherenceOperator, pattern) -> float:
    """Coherence ``m**-1 * ||rows @ 1_K||_inf`` of the selected frame."""
    pattern = _as_pattern(pattern, op.n)
    if pattern.m == 0:
        raise SelectionError("empty selection")
    v = op.rows[:, list(pattern.indices)].sum(axis=1)
    return float(np.abs(v).max() / pattern.m)


@dataclass
class HarmonicConfig:
    """Parameters of the IRL1 row selection.

    ``lam=None`` means ``1/m``; ``local_search_width=None`` means 4 for
    ``n <= 40``, 3 for ``n <= 64`` and 2 beyond.
    """

    irl1_iters: int = 7
    lam: float | None = None
    zeta: float = 0.1
    local_search_width: int | None = None
    support_epsilon: float = 1e-3
    runs: int = 500
    weight_rule: str = "one_minus_g"
    weight_eps: float = 1e-3
    rng_seed: int = 0
    use_complement: bool = True
    fixpoint: bool = True
    stop_at_bound: bool = True

    def __post_init__(self):
        if self.weight_rule not in WEIGHT_RULES:
            raise ValueError(f"unknown weight rule {self.weight_rule!r}")
        if not 0 <= self.zeta < 1:
            raise ValueError("zeta must lie in [0, 1)")
        if self.irl1_iters < 1 or self.runs < 1:
            raise ValueError("irl1_iters and runs must be >= 1")

    def width(self, n: int, m: int) -> int:
        ell = self.local_search_width
        if ell is None:
            ell = 4 if n <= 40 else 3 if n <= 64 else 2
        return max(0, min(ell, m - 1 if m > 1 else 0, n - m))


def update_weights(g: np.ndarray, rule: str, eps: float = 1e-3) -> np.ndarray:
    if rule == "one_minus_g":
        return 1.0 - g
    if rule == "inverse_magnitude":
        return 1.0 / (np.abs(g) + eps)
    if rule == "one_minus_g_over_inf":
        return 1.0 - g / np.abs(g).max()
    raise ValueError(f"unknown weight rule {rule!r}")


def irl1_program(op: CoherenceOperator, m: int, weights: np.ndarray, lam: float, K0=()) -> ConeProgram:
    """Weighted relaxation: minimize ``||rows g||_inf / m + lam * w^T g`` over the relaxed patterns.

    Variables are ``[g (n), t]``; constraints ``g_0 = 1``, ``sum_{k>=1} g_k = m - 1``,
    ``g = 0`` on ``K0`` and ``0 <= g <= 1``.
    """
    n = op.n
    nv = n + 1
    c = np.zeros(nv)
    c[:n] = lam * np.asarray(weights, dtype=float)
    c[n] = 1.0 / m
    blocks = []
    Fr, Fi = op._rows_ri
    r = op.num_rows
    if np.any(Fi != 0):
        A = np.zeros((r, 3, nv))
        A[:, 0, n] = 1.0
        A[:, 1, :n] = Fr
        A[:, 2, :n] = Fi
        blocks.append(ConeBlock.soc(A, np.zeros((r, 3))))
    else:
        A = np.zeros((2 * r, nv))
        A[:, n] = 1.0
        A[:r, :n] = -Fr
        A[r:, :n] = Fr
        blocks.append(ConeBlock.nonneg(A, np.zeros(2 * r)))
    box = np.zeros((2 * n, nv))
    box[:n, :n] = np.eye(n)
    box[n:, :n] = -np.eye(n)
    bb = np.concatenate([np.zeros(n), np.ones(n)])
    blocks.append(ConeBlock.nonneg(box, bb))
    K0 = np.asarray(sorted(K0), dtype=int)
    E = np.zeros((2 + K0.size, nv))
    E[0, 0] = 1.0
    E[1, 1:n] = 1.0
    E[2 + np.arange(K0.size), K0] = 1.0
    d = np.zeros(2 + K0.size)
    d[0] = 1.0
    d[1] = m - 1
    return ConeProgram.build(c, blocks, E, d)


# a stalled relaxation solve is still used if its best iterate is this accurate;
# the relaxation only seeds the rounding, so 1e-6 is ample
RELAX_ACCEPT_TOL = 1e-6


def _usable(sol) -> bool:
    if sol.status not in (conic.MAX_ITERS, conic.NUMERICAL_FAILURE):
        return False
    rgap = sol.gap / max(1.0, abs(sol.objective_value))
    return max(sol.primal_residual, sol.dual_residual, rgap) <= RELAX_ACCEPT_TOL


def irl1_relax(op: CoherenceOperator, m: int, config: HarmonicConfig | None = None, K0=(),
               lam: float | None = None, return_history: bool = False):
    """Reweighted l1 relaxation of the row selection; returns ``g`` in ``[0, 1]^n``."""
    cfg = config or HarmonicConfig()
    n = op.n
    K0 = tuple(sorted(int(k) for k in K0))
    if len(K0) > n - m:
        raise SelectionError(f"infeasible relaxation: |K0| = {len(K0)} exceeds n - m = {n - m}")
    if K0 and (K0[0] < 1 or K0[-1] >= n):
        raise SelectionError("K0 must lie in {1, ..., n-1}")
    lam = (1.0 / m if cfg.lam is None else cfg.lam) if lam is None else lam
    w = np.ones(n)
    history = []
    g = None
    for _ in range(cfg.irl1_iters):
        sol = conic.solve(irl1_program(op, m, w, lam, K0))
        if sol.status != conic.OPTIMAL and not _usable(sol):
            raise SelectionError(f"relaxation solver returned {sol.status}")
        g = np.clip(sol.primal[:n], 0.0, 1.0)
        history.append(g.copy())
        w = update_weights(g, cfg.weight_rule, cfg.weight_eps)
    return (g, history) if return_history else g


@dataclass
class OpCounter:
    """Instrumentation for the greedy steps.

    ``full_products`` counts evaluations of ``rows @ 1_K`` from scratch and
    ``column_updates`` counts single-column corrections ``v -/+ rows e_j``.
    """

    full_products: int = 0
    column_updates: int = 0
    swap_candidates: int = 0


def extract_and_reduce(op: CoherenceOperator, g: np.ndarray, m: int, support_epsilon: float = 1e-3,
                       counter: OpCounter | None = None) -> SelectionPattern:
    """Threshold ``g`` and greedily remove (or add) rows until ``|K| = m``."""
    counter = counter if counter is not None else OpCounter()
    n = op.n
    K = [int(k) for k in np.flatnonzero(np.asarray(g) > support_epsilon)]
    v = op.rows[:, K].sum(axis=1) if K else np.zeros(op.num_rows, dtype=op.rows.dtype)
    counter.full_products += 1
    while len(K) > m:
        cand = np.abs(v[:, None] - op.rows[:, K]).max(axis=0)
        counter.column_updates += len(K)
        j = int(np.argmin(cand))  # first minimum; K is sorted, so lowest index on ties
        v = v - op.rows[:, K[j]]
        counter.column_updates += 1
        del K[j]
    while len(K) < m:
        out = np.setdiff1d(np.arange(n), K)
        cand = np.abs(v[:, None] + op.rows[:, out]).max(axis=0)
        counter.column_updates += out.size
        j = int(out[np.argmin(cand)])
        v = v + op.rows[:, j]
        counter.column_updates += 1
        K = sorted(K + [j])
    return SelectionPattern(n, tuple(K))


def local_search(op: CoherenceOperator, pattern, width: int, fixpoint: bool = True,
                 counter: OpCounter | None = None) -> SelectionPattern:
    """Swap search: exchange up to ``width`` selected rows for unselected ones.

    A swap ``K -> K \\ Z u A`` with ``|Z| = |A| = width`` and ``A`` drawn from
    the unselected rows plus ``Z`` is the same as every swap of size at most
    ``width`` between disjoint sets, which is what gets enumerated.  Each pass
    applies the best strictly improving swap; with ``fixpoint=True`` passes
    repeat until none exists.
    """
    counter = counter if counter is not None else OpCounter()
    pattern = _as_pattern(pattern, op.n)
    if width <= 0 or pattern.m == 0 or pattern.m == op.n:
        return pattern
    Fr, Fi = op._rows_ri
    K = pattern.array()
    while True:
        Kc = np.setdiff1d(np.arange(op.n), K).astype(np.int64)
        v = op.rows[:, K].sum(axis=1)
        counter.full_products += 1
        vr = np.ascontiguousarray(np.real(v), dtype=float)
        vi = np.ascontiguousarray(np.imag(v), dtype=float)
        cur = float(np.max(vr * vr + vi * vi))
        threshold = cur - 1e-9 * max(cur, 1.0)
        best, Z, A, count = _combinatorics.best_swap(Fr, Fi, vr, vi, K, Kc, int(width), threshold)
        counter.swap_candidates += int(count)
        if Z[0] < 0:
            break
        Z = Z[Z >= 0]
        A = A[A >= 0]
        K = np.sort(np.concatenate([np.setdiff1d(K, Z), A])).astype(np.int64)
        if not fixpoint:
            break
    return SelectionPattern(op.n, tuple(K))


def complement(pattern, n: int | None = None) -> SelectionPattern:
    """Unselected rows ``{0, ..., n-1} \\ K``."""
    if not isinstance(pattern, SelectionPattern):
        pattern = SelectionPattern(n, tuple(pattern))
    n = pattern.n if n is None else n
    return SelectionPattern(n, tuple(sorted(set(range(n)) - set(pattern.indices))))


def complement_coherence(coherence_value: float, m: int, n: int) -> float:
    """Coherence of the complementary selection, ``m / (n - m)`` times the original.

    Valid for operators whose reduced rows sum to zero (``op.balanced``).
    """
    if not 0 < m < n:
        raise SelectionError("complement needs 0 < m < n")
    return coherence_value * m / (n - m)


def equivalence_maps(pattern, n: int | None = None, source: str = "fourier") -> set:
    """All circular shifts and coprime multiples of a Fourier selection pattern."""
    if source != "fourier":
        raise SelectionError("equivalence classes undefined")
    if not isinstance(pattern, SelectionPattern):
        pattern = SelectionPattern(n, tuple(pattern))
    n = pattern.n
    K = pattern.array()
    out = set()
    for tau in range(1, n):
        if math.gcd(tau, n) != 1:
            continue
        base = (tau * K) % n
        for j in range(n):
            out.add(SelectionPattern(n, tuple((base + j) % n)))
    return out


@dataclass
class SelectionReport:
    pattern: SelectionPattern
    coherence: float
    welch: float
    runs_done: int
    run_values: list = field(default_factory=list)
    from_complement: bool = False
    counter: OpCounter = field(default_factory=OpCounter)
    failed_runs: int = 0

    def to_dict(self) -> dict:
        return {
            "n": self.pattern.n,
            "m": self.pattern.m,
            "indices": list(self.pattern.indices),
            "coherence": self.coherence,
            "welch_bound": self.welch,
            "runs_done": self.runs_done,
            "from_complement": self.from_complement,
            "run_values": [float(v) for v in self.run_values],
            "failed_runs": self.failed_runs,
        }


def _single_run(op, m, cfg, rng, counter):
    n = op.n
    size = math.ceil(cfg.zeta * (n - m))
    K0 = tuple(sorted(rng.choice(np.arange(1, n), size=size, replace=False))) if size else ()
    g = irl1_relax(op, m, cfg, K0)
    pat = extract_and_reduce(op, g, m, cfg.support_epsilon, counter)
    pat = local_search(op, pat, cfg.width(n, m), cfg.fixpoint, counter)
    return pat, selection_coherence(op, pat)


def select_rows(op: CoherenceOperator, m: int, config: HarmonicConfig | None = None,
                return_report: bool = False):
    """Search for an ``m``-row selection of minimal coherence.

    Every restart samples a random zero set ``K0``, solves the reweighted
    relaxation, reduces the support to ``m`` rows and runs the swap search.
    For balanced operators the complementary size ``n - m`` is searched as
    well and mapped back.  Restarts stop early once the Welch bound is met.

    Returns ``(pattern, coherence)`` or, with ``return_report=True``, a
    :class:`SelectionReport`.
    """
    cfg = config or HarmonicConfig()
    n = op.n
    if not 1 <= m < n:
        raise SelectionError("need 1 <= m < n")
    rng = np.random.default_rng(cfg.rng_seed)
    wb = welch_bound(m, n)
    counter = OpCounter()
    best_pat, best = None, np.inf
    from_comp = False
    values = []
    sizes = [m]
    if cfg.use_complement and op.balanced and n - m != m:
        sizes.append(n - m)
    runs = failed = 0
    last_error = None
    for _ in range(cfg.runs):
        runs += 1
        for size in sizes:
            try:
                pat, val = _single_run(op, size, cfg, rng, counter)
            except SelectionError as exc:
                # a relaxation the solver cannot finish costs one restart, not the search
                failed += 1
                last_error = exc
                continue
            if size != m:
                pat = complement(pat)
                val = selection_coherence(op, pat)
            values.append(val)
            if val < best - 1e-15:
                best_pat, best, from_comp = pat, val, size != m
        if cfg.stop_at_bound and best <= wb + 1e-12:
            break
    if best_pat is None:
        raise SelectionError(f"every restart failed; last error: {last_error}")
    report = SelectionReport(best_pat, float(best), wb, runs, values, from_comp, counter, failed)
    return report if return_report else (best_pat, float(best))
