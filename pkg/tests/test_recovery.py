import numpy as np
import pytest

from conftest import random_unit_frame
from incoherent_frames.frame import mutual_coherence
from incoherent_frames.recovery import (RecoveryTask, draw_problems, omp, omp_batch, random_frame,
                                        run_bench, run_sweep)
from incoherent_frames.sidco import SidcoConfig, VariantSpec, run


def test_random_frame_normalization():
    A = random_frame(25, 150, True, seed=0)
    assert np.linalg.norm(A) ** 2 == pytest.approx(150)
    assert not np.iscomplexobj(random_frame(5, 10, False, seed=0))


def test_omp_trivial_cases(rng):
    A = random_unit_frame(rng, 8, 20)
    assert np.all(omp(A, np.zeros(8), 3) == 0)
    x = np.zeros(20, dtype=complex)
    x[7] = 0.3 - 1.1j
    xh = omp(A, A @ x, 1)
    assert np.allclose(xh, x, atol=1e-12)
    with pytest.raises(ValueError):
        omp(A, A @ x, 9)


def test_omp_orthonormal_exact(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((10, 10)))
    for _ in range(20):
        s = int(rng.integers(1, 11))
        x = np.zeros(10)
        x[rng.choice(10, s, replace=False)] = rng.standard_normal(s)
        assert np.allclose(omp(Q, Q @ x, s), x, atol=1e-10)


def test_omp_coherence_guarantee():
    rep = run(8, 16, VariantSpec("complex"), SidcoConfig(max_iterations=100, rng_seed=0))
    A = rep.best_frame
    mu = mutual_coherence(A)
    s_max = int(np.ceil((1 + 1 / mu) / 2)) - 1
    assert s_max >= 1
    rng = np.random.default_rng(1)
    for _ in range(10_000 // 20):
        s = int(rng.integers(1, s_max + 1))
        x = np.zeros(16, dtype=complex)
        supp = rng.choice(16, s, replace=False)
        x[supp] = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        res = omp(A, A @ x, s, return_info=True)
        assert sorted(res.support) == sorted(supp)
        assert np.allclose(res.x, x, atol=1e-9)


def test_omp_singular_flag():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    res = omp(A, np.array([1.0, 0.0]) + 1e-3 * np.array([0, 1.0]), 2, return_info=True)
    assert len(res.support) <= 2


def test_batch_matches_single(rng):
    A = random_frame(12, 30, True, seed=2)
    X, _, clean, noise = draw_problems(12, 30, 4, 50, 15.0, A, 3, True)
    Y = clean + noise
    B = omp_batch(A, Y, 4)
    for t in range(50):
        assert np.allclose(B[:, t], omp(A, Y[:, t], 4), atol=1e-10)


def test_snr_scaling():
    A = random_frame(25, 150, True, seed=0)
    res = run_bench(RecoveryTask(A, 5, 15.0, 20_000, 0))
    assert abs(res.empirical_snr_db[0] - 15.0) <= 0.1


def test_metric_ranges_and_determinism():
    A = random_frame(10, 30, False, seed=1)
    a = run_sweep(A, [1, 3, 5], 10.0, 300, seed=4)
    b = run_sweep(A, [1, 3, 5], 10.0, 300, seed=4)
    assert a.to_csv() == b.to_csv()
    for s, se, mse in zip(a.sparsity, a.mean_support_error, a.mean_squared_error):
        assert 0 <= se <= s and mse >= 0
    lines = a.to_csv().splitlines()
    assert lines[0].startswith("#") and lines[1] == "s,mean_support_error,mean_squared_error,trials"


def test_noiseless_limit():
    rep = run(8, 16, VariantSpec("complex"), SidcoConfig(max_iterations=100, rng_seed=0))
    res = run_bench(RecoveryTask(rep.best_frame, 2, 300.0, 2000, 0))
    assert res.mean_support_error[0] == 0


def test_task_validation():
    A = random_frame(5, 10, seed=0)
    with pytest.raises(ValueError):
        RecoveryTask(A, 6)
    with pytest.raises(ValueError):
        RecoveryTask(A, 2, trials=0)
