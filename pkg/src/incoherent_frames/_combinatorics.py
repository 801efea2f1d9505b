"""Compiled inner loops for row-selection search (swap search and enumeration)."""

import numpy as np
from numba import njit


@njit(cache=True)
def _next_combination(idx, k, n):
    # advance idx (k sorted positions in range(n)) to the next combination in lex order
    i = k - 1
    while i >= 0 and idx[i] == n - k + i:
        i -= 1
    if i < 0:
        return -1
    idx[i] += 1
    for j in range(i + 1, k):
        idx[j] = idx[j - 1] + 1
    return i


@njit(cache=True)
def best_swap(Fr, Fi, vr, vi, K, Kc, max_size, threshold_sq):
    """Best exchange of up to ``max_size`` selected rows for unselected ones.

    Returns ``(best_sq, Z, A, evaluated)`` where ``Z`` and ``A`` hold the
    removed and added row indices (padded with -1) of the swap with the
    smallest squared sup-norm, restricted to values strictly below
    ``threshold_sq``.  ``best_sq`` equals ``threshold_sq`` if nothing beats it.
    Candidates are rejected row by row as soon as one row reaches the current
    best, which is what keeps the search cheap.
    """
    nr = Fr.shape[0]
    best_sq = threshold_sq
    Zb = -np.ones(max_size, dtype=np.int64)
    Ab = -np.ones(max_size, dtype=np.int64)
    ur = np.empty(nr)
    ui = np.empty(nr)
    evaluated = 0
    nk = K.size
    nc = Kc.size
    for s in range(1, max_size + 1):
        if s > nk or s > nc:
            break
        zi = np.arange(s)
        while True:
            for r in range(nr):
                ar = vr[r]
                ai = vi[r]
                for q in range(s):
                    c = K[zi[q]]
                    ar -= Fr[r, c]
                    ai -= Fi[r, c]
                ur[r] = ar
                ui[r] = ai
            ai_idx = np.arange(s)
            while True:
                evaluated += 1
                worst = 0.0
                ok = True
                for r in range(nr):
                    ar = ur[r]
                    aim = ui[r]
                    for q in range(s):
                        c = Kc[ai_idx[q]]
                        ar += Fr[r, c]
                        aim += Fi[r, c]
                    val = ar * ar + aim * aim
                    if val >= best_sq:
                        ok = False
                        break
                    if val > worst:
                        worst = val
                if ok:
                    best_sq = worst
                    Zb[:] = -1
                    Ab[:] = -1
                    for q in range(s):
                        Zb[q] = K[zi[q]]
                        Ab[q] = Kc[ai_idx[q]]
                if _next_combination(ai_idx, s, nc) < 0:
                    break
            if _next_combination(zi, s, nk) < 0:
                break
    return best_sq, Zb, Ab, evaluated


@njit(cache=True)
def enumerate_best(Fr, Fi, base_r, base_i, candidates, k):
    """Exhaustive minimum of the squared sup-norm over ``k``-subsets of ``candidates``.

    ``base`` is the contribution of the rows that are always selected.  The
    subsets are visited in lexicographic order and only improvements beyond a
    relative round-off margin of 1e-11 are kept, so ties (exact or up to
    summation-order noise) resolve to the lexicographically smallest subset.
    Returns ``(best_sq, best_subset, count)``.
    """
    nr = Fr.shape[0]
    nc = candidates.size
    best_sq = np.inf
    best = np.empty(k, dtype=np.int64)
    count = 0
    if k == 0:
        val = 0.0
        for r in range(nr):
            v = base_r[r] * base_r[r] + base_i[r] * base_i[r]
            if v > val:
                val = v
        return val, best, 1
    # partial sums: level j holds base + rows of idx[0..j-1]
    pr = np.empty((k + 1, nr))
    pi = np.empty((k + 1, nr))
    pr[0] = base_r
    pi[0] = base_i
    idx = np.arange(k)
    start = 0
    cut = np.inf
    while True:
        for j in range(start, k):
            c = candidates[idx[j]]
            for r in range(nr):
                pr[j + 1, r] = pr[j, r] + Fr[r, c]
                pi[j + 1, r] = pi[j, r] + Fi[r, c]
        count += 1
        val = 0.0
        for r in range(nr):
            v = pr[k, r] * pr[k, r] + pi[k, r] * pi[k, r]
            if v > val:
                val = v
                if val >= cut:
                    break
        if val < cut:
            best_sq = val
            cut = val - 1e-11 * max(val, 1.0)
            for j in range(k):
                best[j] = candidates[idx[j]]
        start = _next_combination(idx, k, nc)
        if start < 0:
            break
    return best_sq, best, count
