import itertools

import numpy as np
import pytest

from conftest import random_unit_frame
from incoherent_frames.conic import solve
from incoherent_frames.frame import coherence, welch_bound
from incoherent_frames.harmonic import (CoherenceOperator, HarmonicConfig, SelectionPattern,
                                        equivalence_maps, select_rows, selection_coherence)
from incoherent_frames.oracle import (BudgetExceeded, OracleBudget, exhaustive_select,
                                      naive_coherence, subgradient_solve)
from incoherent_frames.sidco import VariantSpec, trust_radius
from incoherent_frames.subproblem import build_sidco_subproblem


def test_fourier_8_2_by_hand():
    op = CoherenceOperator("fourier", 8)
    pat, val = exhaustive_select(op, 2)
    vals = [coherence(op.frame(SelectionPattern(8, (0, k)))).coherence for k in range(1, 8)]
    assert val == pytest.approx(min(vals), abs=1e-14)
    first = next(k for k, v in enumerate(vals) if v <= min(vals) + 1e-12)
    assert pat.indices == (0, 1 + first)


def test_full_selection():
    op = CoherenceOperator("fourier", 6)
    pat, val = exhaustive_select(op, 6)
    assert pat.m == 6 and val == pytest.approx(0, abs=1e-14)


def test_unfixed_enumeration_agrees_and_ties_lex():
    op = CoherenceOperator("fourier", 10)
    for m in range(2, 6):
        _, v1 = exhaustive_select(op, m)
        p2, v2 = exhaustive_select(op, m, fix_first=False)
        assert v1 == pytest.approx(v2, abs=1e-12)
        brute = min(itertools.combinations(range(10), m),
                    key=lambda K: (round(selection_coherence(op, K), 12), K))
        assert p2.indices == brute


def test_budget():
    op = CoherenceOperator("fourier", 32)
    with pytest.raises(BudgetExceeded) as exc:
        exhaustive_select(op, 10, OracleBudget(max_patterns=1000))
    assert exc.value.required == 20160075
    with pytest.raises(ValueError):
        OracleBudget(max_patterns=0)


def test_equivalence_images_are_optimal():
    op = CoherenceOperator("fourier", 16)
    pat, val = exhaustive_select(op, 5)
    for q in equivalence_maps(pat):
        assert selection_coherence(op, q) == pytest.approx(val, abs=1e-12)


@pytest.mark.parametrize("m", [3, 4, 6])
def test_oracle_is_global(m):
    op = CoherenceOperator("fourier", 16)
    _, best = exhaustive_select(op, m)
    _, found = select_rows(op, m, HarmonicConfig(runs=2, rng_seed=0))
    assert best <= found + 1e-12


def test_naive_coherence():
    assert naive_coherence(np.eye(4)) == 0
    op = CoherenceOperator("fourier", 40)
    pat, _ = select_rows(op, 13, HarmonicConfig(runs=50, rng_seed=0))
    assert naive_coherence(op.frame(pat)) == pytest.approx(welch_bound(13, 40), abs=1e-12)
    assert round(naive_coherence(op.frame(pat)), 4) == 0.2308
    with pytest.raises(ValueError):
        naive_coherence(np.zeros((3, 2)))


def test_subgradient_single_competitor():
    theta = 0.4
    F = np.array([[1.0, np.cos(theta)], [0.0, np.sin(theta)]])
    T = trust_radius(F, 0)
    val = subgradient_solve(F, 0, VariantSpec("real"), T, budget=OracleBudget(subgradient_iters=20000))
    assert val == pytest.approx(np.cos(theta) - np.sin(theta), abs=1e-5)


def test_subgradient_zero_radius():
    F = random_unit_frame(np.random.default_rng(0), 3, 5)
    center = np.max(np.abs(F[:, 1:].conj().T @ F[:, 0]))
    assert subgradient_solve(F, 0, VariantSpec("complex"), 0.0) == center


@pytest.mark.parametrize("kind", ["complex", "real", "nonneg_complex", "unital"])
def test_subgradient_upper_bounds_solver(kind):
    rng = np.random.default_rng(11)
    budget = OracleBudget(subgradient_iters=2000)
    for _ in range(3):
        F = random_unit_frame(rng, 4, 8, cplx=kind != "real")
        if kind == "nonneg_complex":
            F = np.abs(F.real) + 1j * np.abs(F.imag)
            F /= np.linalg.norm(F, axis=0)
        if kind == "unital":
            F = np.exp(1j * np.angle(F)) / 2
        v = VariantSpec(kind)
        T = trust_radius(F, 0)
        sol = solve(build_sidco_subproblem(F, 0, v, T))
        val = subgradient_solve(F, 0, v, T, budget=budget)
        assert sol.dual_objective <= val + 1e-9
        assert val - sol.objective_value <= 1e-6 * max(1.0, abs(val))
