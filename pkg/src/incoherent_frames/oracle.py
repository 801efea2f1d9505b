"""Independent reference computations used to check the main engines.

* ``exhaustive_select``: global optimum of the row selection by enumeration.
* ``subgradient_solve``: projected subgradient descent on the original
  (non-epigraph) form of a column subproblem, finished by a local SLSQP
  refinement and an exact projection, so the returned value always belongs to
  a feasible point.
* ``naive_coherence``: the coherence definition as a double loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import _combinatorics
from .frame import FrameError
from .harmonic import CoherenceOperator, SelectionPattern
from .subproblem import is_complex_kind


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"enumeration needs {required} patterns, budget is {budget}")
        self.required = required


@dataclass
class OracleBudget:
    max_patterns: int = 10 ** 7
    subgradient_iters: int = 100_000
    subgradient_tol: float = 1e-12

    def __post_init__(self):
        if self.max_patterns <= 0 or self.subgradient_iters <= 0 or self.subgradient_tol <= 0:
            raise ValueError("oracle budget caps must be positive")


def exhaustive_select(op: CoherenceOperator, m: int, budget: OracleBudget | None = None,
                      fix_first: bool | None = None):
    """Globally most incoherent ``m``-row selection.

    With ``fix_first`` (default for Fourier and Sylvester-Hadamard sources,
    whose selections are invariant under shifts) row 0 is always selected and
    ``C(n-1, m-1)`` patterns are enumerated; otherwise ``C(n, m)``.  Ties go
    to the lexicographically smallest pattern.
    """
    budget = budget or OracleBudget()
    n = op.n
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if fix_first is None:
        fix_first = op.source in ("fourier", "hadamard")
    if fix_first:
        required = math.comb(n - 1, m - 1)
    else:
        required = math.comb(n, m)
    if required > budget.max_patterns:
        raise BudgetExceeded(required, budget.max_patterns)
    Fr, Fi = op._rows_ri
    if fix_first:
        base_r, base_i = Fr[:, 0].copy(), Fi[:, 0].copy()
        cand = np.arange(1, n, dtype=np.int64)
        k = m - 1
    else:
        base_r, base_i = np.zeros(op.num_rows), np.zeros(op.num_rows)
        cand = np.arange(n, dtype=np.int64)
        k = m
    best_sq, best, count = _combinatorics.enumerate_best(Fr, Fi, base_r, base_i, cand, k)
    idx = tuple(best.tolist()) + ((0,) if fix_first else ())
    pattern = SelectionPattern(n, idx)
    return pattern, float(np.sqrt(best_sq) / m)


def naive_coherence(frame) -> float:
    """Largest normalized inner-product modulus, computed pair by pair."""
    F = np.asarray(frame)
    if F.ndim != 2 or F.shape[1] < 2:
        raise FrameError("invalid dimensions")
    m, n = F.shape
    cols = [F[:, j] for j in range(n)]
    norms = []
    for c in cols:
        s = 0.0
        for v in c:
            s += abs(v) ** 2
        if s == 0:
            raise FrameError("degenerate column")
        norms.append(math.sqrt(s))
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0j
            for k in range(m):
                acc += np.conj(cols[i][k]) * cols[j][k]
            best = max(best, abs(acc) / (norms[i] * norms[j]))
    return float(best)


# --------------------------------------------------------------------------
# subgradient oracle for the per-column subproblems


class _Problem:
    """Original form of a column subproblem over ``f`` (complex or real)."""

    def __init__(self, reference, column_index, variant, trust_radius, zero_rows=None, l1_weight=None):
        self.m = reference.shape[0]
        self.kind = variant.kind
        self.cplx = is_complex_kind(variant.kind)
        self.h = reference[:, column_index].astype(complex if self.cplx else float)
        self.others = np.delete(reference, column_index, axis=1)
        self.T = float(trust_radius)
        if l1_weight is None:
            l1_weight = 0.0 if variant.fixed_support else variant.l1_weight(self.m)
        self.lam = float(l1_weight) if variant.kind.startswith("sparse") else 0.0
        self.zero = np.zeros(self.m, dtype=bool)
        if zero_rows is None and variant.fixed_support and variant.support_mask is not None:
            zero_rows = np.flatnonzero(variant.support_mask[:, column_index])
        if zero_rows is not None:
            self.zero[np.asarray(zero_rows, dtype=int)] = True
        if self.kind == "unital":
            self.entry_radius = math.sqrt(variant.radius_scale(self.m) * self.T)
            self.cap = self.m ** -0.5 + variant.gamma

    def objective(self, f):
        val = np.abs(self.others.conj().T @ f).max()
        if self.lam:
            val += self.lam * np.abs(f).sum()
        return float(val)

    def subgradient(self, f):
        c = self.others.conj().T @ f
        j = int(np.argmax(np.abs(c)))
        a = self.others[:, j]
        mod = abs(c[j])
        phase = c[j] / mod if mod > 0 else 1.0
        g = a * phase  # gradient of |a^H f| in the real inner product <x, y> = Re(x^H y)
        if self.lam:
            mag = np.abs(f)
            g = g + self.lam * np.where(mag > 0, f / np.where(mag > 0, mag, 1), 0)
        return g

    def project(self, f):
        f = f.copy()
        f[self.zero] = 0
        if self.kind == "unital":
            for k in range(self.m):
                f[k] = _project_two_discs(f[k], self.h[k], self.entry_radius, self.cap)
            return f
        if self.kind.startswith("nonneg"):
            f = _clamp(f)
        center = self.h.copy()
        center[self.zero] = 0
        # ball around h intersected with the subspace f[zero] = 0 is a ball around the
        # projected center of radius sqrt(T - |h_zero|^2)
        r2 = self.T - float(np.sum(np.abs(self.h[self.zero]) ** 2))
        r = math.sqrt(max(r2, 0.0))
        d = f - center
        nd = np.linalg.norm(d)
        if nd > r:
            f = center + d * (r / nd)
        if self.kind.startswith("nonneg"):
            # the center is nonnegative, so pulling toward it keeps the sign constraint;
            # alternate once more to land in the intersection
            for _ in range(50):
                g = _clamp(f)
                d = g - center
                nd = np.linalg.norm(d)
                if nd > r:
                    g = center + d * (r / nd)
                if np.linalg.norm(g - f) < 1e-16:
                    break
                f = g
            f = _clamp(f)
            d = f - center
            nd = np.linalg.norm(d)
            if nd > r:
                f = center + d * (r / nd)
        return f

    # real parametrization for SLSQP
    def pack(self, f):
        f = f[~self.zero]
        return np.concatenate([f.real, f.imag]) if self.cplx else f.real.copy()

    def unpack(self, x):
        f = np.zeros(self.m, dtype=self.h.dtype)
        k = int((~self.zero).sum())
        f[~self.zero] = x[:k] + 1j * x[k:2 * k] if self.cplx else x[:k]
        return f


def _clamp(f):
    if np.iscomplexobj(f):
        return np.maximum(f.real, 0) + 1j * np.maximum(f.imag, 0)
    return np.maximum(f, 0)


def _project_two_discs(z, c, r, R):
    """Projection of ``z`` onto ``{|w - c| <= r} & {|w| <= R}`` (nonempty when ``|c| <= R``)."""
    if abs(z - c) <= r and abs(z) <= R:
        return z
    p = c + (z - c) * min(1.0, r / max(abs(z - c), 1e-300))
    if abs(p) <= R:
        return p
    q = z * min(1.0, R / max(abs(z), 1e-300))
    if abs(q - c) <= r:
        return q
    # the projection lies on both circles: pick the intersection point closest to z
    d = abs(c)
    if d == 0:
        return q
    a = (R * R - r * r + d * d) / (2 * d)
    hh = math.sqrt(max(R * R - a * a, 0.0))
    u = c / d
    base = a * u
    pts = [base + hh * 1j * u, base - hh * 1j * u]
    return min(pts, key=lambda w: abs(w - z))


def subgradient_solve(reference, column_index, variant, trust_radius, zero_rows=None,
                      l1_weight=None, budget: OracleBudget | None = None, refine: bool = True) -> float:
    """Upper estimate of the optimal value of one column subproblem.

    Runs projected subgradient descent with step ``c / sqrt(t)`` (``c``
    proportional to the trust radius) on the original objective, keeps the
    best iterate, optionally refines it with SLSQP on a smooth epigraph form,
    and finally projects onto the feasible set.  The value returned is the
    exact objective of a feasible point, hence never below the true optimum.
    """
    budget = budget or OracleBudget()
    P = _Problem(reference, column_index, variant, trust_radius, zero_rows, l1_weight)
    f = P.project(P.h.copy())
    best_f, best = f, P.objective(f)
    step0 = 0.5 * math.sqrt(max(P.T, 1e-16))
    if P.T <= 0:
        return best
    for t in range(1, budget.subgradient_iters + 1):
        g = P.subgradient(f)
        ng = np.linalg.norm(g)
        if ng == 0:
            break
        f = P.project(f - (step0 / math.sqrt(t)) * g / ng)
        val = P.objective(f)
        if val < best:
            best, best_f = val, f
    if refine:
        for cand in _slsqp_refine(P, best_f, budget.subgradient_tol):
            val = P.objective(P.project(cand))
            if val < best:
                best = val
    return float(best)


def _slsqp_refine(P: _Problem, f0, tol):
    """Local refinements of ``f0`` on a smooth epigraph form; returns candidate columns.

    The l1 term is smoothed as ``sum sqrt(|f_k|^2 + eps^2)`` and ``eps`` is
    driven to zero by continuation, warm-starting each solve from the last.
    (Splitting ``|f_k| <= a_k`` instead loses constraint qualification at
    ``a_k = f_k = 0``, exactly where sparse optima sit.)
    """
    x0 = P.pack(f0)
    k = x0.size
    cplx = P.cplx
    mfree = int((~P.zero).sum())
    A = P.others[~P.zero]  # rows of the free entries
    h = P.h[~P.zero]
    r2 = P.T - float(np.sum(np.abs(P.h[P.zero]) ** 2))
    use_l1 = P.lam > 0

    def split(z):
        x = z[:k]
        f = x[:mfree] + 1j * x[mfree:] if cplx else x
        return f, z[k]

    def cons(z):
        f, t = split(z)
        c = A.conj().T @ f
        out = [t * t - np.abs(c) ** 2, [t]]
        if P.kind == "unital":
            out.append(P.entry_radius ** 2 - np.abs(f - h) ** 2)
            out.append(P.cap ** 2 - np.abs(f) ** 2)
        else:
            out.append([r2 - np.sum(np.abs(f - h) ** 2)])
        if P.kind.startswith("nonneg"):
            out.append(np.concatenate([f.real, f.imag]) if cplx else f)
        return np.concatenate([np.ravel(o) for o in out])

    f0c = P.unpack(x0)[~P.zero]
    z = np.concatenate([x0, [np.abs(A.conj().T @ f0c).max() + 1e-9]])
    out = []
    for eps in ((1e-3, 1e-5, 1e-7, 1e-9) if use_l1 else (0.0,)):
        def obj(z, eps=eps):
            f, t = split(z)
            return t + (P.lam * np.sum(np.sqrt(np.abs(f) ** 2 + eps * eps)) if use_l1 else 0.0)
        try:
            res = minimize(obj, z, method="SLSQP", constraints=[{"type": "ineq", "fun": cons}],
                           options={"maxiter": 500, "ftol": tol})
        except (ValueError, np.linalg.LinAlgError):
            break
        z = res.x
        f, _ = split(z)
        out.append(P.unpack(np.concatenate([f.real, f.imag]) if cplx else f))
    return out
