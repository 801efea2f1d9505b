import json

import numpy as np
import pytest

from incoherent_frames.frame import FrameError, mutual_coherence, welch_bound
from incoherent_frames.sidco import (SidcoConfig, VariantSpec, initialize, make_fixed_support, polish,
                                     run, trust_radius)


def test_initialize_properties():
    for kind in ["real", "complex", "unital", "nonneg_real", "nonneg_complex"]:
        v = VariantSpec(kind)
        H = initialize(5, 11, v, seed=3)
        assert np.allclose(np.linalg.norm(H, axis=0), 1, atol=1e-12)
        assert np.array_equal(H, initialize(5, 11, v, seed=3))
        if kind == "unital":
            assert np.allclose(np.abs(H), 5 ** -0.5, atol=1e-12)
        if kind.startswith("nonneg"):
            assert H.real.min() >= 0 and H.imag.min() >= 0
    with pytest.raises(ValueError):
        initialize(4, 4, VariantSpec("real"))


def test_trust_radius():
    assert trust_radius(np.eye(3), 0) == 1.0
    F = np.array([[1.0, 0.6], [0.0, 0.8]])
    assert trust_radius(F, 0) == pytest.approx(0.64)
    G = np.array([[1, 0.6j], [0, 0.8]])
    assert trust_radius(G, 0) == pytest.approx(0.64)
    with pytest.raises(FrameError, match="coincident"):
        trust_radius(np.array([[1.0, 1.0], [0.0, 0.0]]), 0)


def test_fixed_support_mask():
    assert not make_fixed_support(4, 6, 0, seed=1).any()
    mask = make_fixed_support(5, 8, 2, seed=1)
    assert np.all(mask.sum(axis=0) == 2)
    with pytest.raises(ValueError):
        make_fixed_support(4, 6, 4)


def test_fixed_support_design_respects_mask():
    mask = make_fixed_support(5, 10, 2, seed=4)
    v = VariantSpec("sparse_complex", sparsity_mode="fixed_support", support_mask=mask)
    rep = run(5, 10, v, SidcoConfig(max_iterations=20, rng_seed=4))
    assert np.all(rep.best_frame[mask] == 0)
    assert np.all(np.diff(rep.trajectory) <= 1e-12)


def test_one_sparse_columns_need_disjoint_supports():
    # with m-1 zeros per column every column is a basis vector: coherence 0 iff supports are disjoint
    m, n = 3, 4
    mask = make_fixed_support(m, n, m - 1, seed=0)
    v = VariantSpec("sparse_real", sparsity_mode="fixed_support", support_mask=mask)
    H = initialize(m, n, v, seed=0)
    assert np.allclose(np.abs(H).sum(axis=0), 1)
    assert mutual_coherence(H) == 1.0  # n > m forces a shared support by pigeonhole


def test_complex_small_reaches_welch():
    rep = run(4, 7, VariantSpec("complex"), SidcoConfig(max_iterations=300, rng_seed=1))
    assert rep.best_coherence <= 0.3540
    assert rep.best_coherence >= welch_bound(4, 7) - 1e-12
    assert rep.best_coherence == pytest.approx(mutual_coherence(rep.best_frame), abs=1e-15)


@pytest.mark.parametrize("kind", ["real", "complex", "nonneg_real", "nonneg_complex"])
def test_descent_and_report_invariants(kind):
    rep = run(4, 9, VariantSpec(kind), SidcoConfig(max_iterations=30, rng_seed=2))
    for before, after in zip(rep.sweep_start, rep.trajectory):
        assert after <= before + 1e-12
    assert rep.best_coherence == pytest.approx(min([rep.sweep_start[0]] + rep.trajectory), abs=0)
    assert rep.best_coherence >= welch_bound(4, 9) - 1e-12
    if kind.startswith("nonneg"):
        assert rep.best_frame.real.min() >= -1e-12 and np.asarray(rep.best_frame).imag.min() >= -1e-12


def test_unital_design():
    rep = run(5, 12, VariantSpec("unital", gamma=0.01), SidcoConfig(max_iterations=40, rng_seed=0))
    assert np.allclose(np.abs(rep.best_frame), 5 ** -0.5, atol=1e-10)
    p = np.abs(rep.best_frame) ** 2
    assert np.allclose(p.max(axis=0) / p.mean(axis=0), 1, atol=1e-9)
    assert rep.best_coherence == min(rep.trajectory + [rep.sweep_start[0]])


def test_sparse_l1_design_and_polish():
    base = run(6, 12, VariantSpec("real"), SidcoConfig(max_iterations=100, rng_seed=0))
    v = VariantSpec("sparse_real", lam=1.8)
    rep = run(6, 12, v, SidcoConfig(max_iterations=50, rng_seed=0), initial_frame=base.best_frame)
    zeros = np.mean(rep.best_frame == 0)
    assert zeros > 0
    assert rep.polish_sweeps >= 1
    assert rep.retractions_applied == 0
    H, mask, _ = polish(rep.best_frame, v)
    assert np.all(H[mask] == 0)


def test_reproducible():
    cfg = SidcoConfig(max_iterations=10, rng_seed=7)
    a = run(4, 8, VariantSpec("complex"), cfg)
    b = run(4, 8, VariantSpec("complex"), cfg)
    assert np.array_equal(a.best_frame, b.best_frame)
    assert a.trajectory == b.trajectory
    assert a.to_json() == b.to_json()


def test_report_serialization():
    rep = run(3, 5, VariantSpec("real"), SidcoConfig(max_iterations=5, rng_seed=0))
    d = json.loads(rep.to_json())
    assert d["best_coherence"] == rep.best_coherence
    lines = rep.trajectory_csv().strip().splitlines()
    assert lines[0] == "iteration,coherence"
    assert len(lines) == rep.iterations_run + 1


def test_variant_validation():
    with pytest.raises(ValueError):
        VariantSpec("quaternion")
    with pytest.raises(ValueError):
        VariantSpec("unital", gamma=0)
    with pytest.raises(ValueError):
        VariantSpec("sparse_real", lam=-1)
    with pytest.raises(ValueError):
        SidcoConfig(max_iterations=0)
    with pytest.raises(ValueError):
        run(3, 6, VariantSpec("sparse_real", sparsity_mode="fixed_support"))
