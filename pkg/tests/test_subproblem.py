import numpy as np
import pytest

from conftest import random_unit_frame
from incoherent_frames.conic import solve
from incoherent_frames.frame import normalize_columns
from incoherent_frames.sidco import VariantSpec, trust_radius, update_column
from incoherent_frames.subproblem import build_sidco_subproblem, is_complex_kind


def frame_for(kind, rng, m, n):
    F = random_unit_frame(rng, m, n, cplx=is_complex_kind(kind))
    if kind.startswith("nonneg"):
        F = normalize_columns(np.abs(F.real) + (1j * np.abs(F.imag) if np.iscomplexobj(F) else 0))
    if kind == "unital":
        F = np.exp(1j * np.angle(F)) / np.sqrt(m)
    return F


def test_real_counts():
    F = random_unit_frame(np.random.default_rng(0), 3, 4, cplx=False)
    prog = build_sidco_subproblem(F, 0, VariantSpec("real"), 0.5)
    assert prog.num_vars == 3 + 1
    counts = prog.cone_counts()
    assert counts["nonneg"] == 2 * 3
    assert counts["soc"] == {3 + 1: 1}


def test_complex_counts():
    m, n = 4, 8
    F = random_unit_frame(np.random.default_rng(1), m, n)
    prog = build_sidco_subproblem(F, 2, VariantSpec("complex"), 0.5)
    assert prog.num_vars == 2 * m + 1
    counts = prog.cone_counts()
    assert counts["soc"][3] == n - 1
    assert counts["soc"][2 * m + 1] == 1


def test_unital_counts():
    m, n = 4, 8
    F = frame_for("unital", np.random.default_rng(2), m, n)
    prog = build_sidco_subproblem(F, 0, VariantSpec("unital"), 0.5)
    counts = prog.cone_counts()
    # n-1 correlation cones plus m trust cones plus m magnitude cones, all of dimension 3
    assert counts["soc"] == {3: (n - 1) + m + m}


def test_sparse_and_nonneg_blocks():
    m, n = 4, 6
    rng = np.random.default_rng(3)
    F = random_unit_frame(rng, m, n, cplx=False)
    prog = build_sidco_subproblem(F, 0, VariantSpec("sparse_real", lam=1.8), 0.5)
    assert prog.num_vars == m + 1 + m
    assert prog.cone_counts()["nonneg"] == 2 * (n - 1) + 2 * m
    prog = build_sidco_subproblem(frame_for("nonneg_complex", rng, m, n), 0, VariantSpec("nonneg_complex"), 0.5)
    assert prog.cone_counts()["nonneg"] == 2 * m


def test_errors():
    F = random_unit_frame(np.random.default_rng(4), 3, 1)
    with pytest.raises(ValueError, match="competitor"):
        build_sidco_subproblem(F, 0, VariantSpec("complex"), 0.5)
    F = random_unit_frame(np.random.default_rng(4), 3, 4)
    with pytest.raises(ValueError):
        build_sidco_subproblem(F, 0, VariantSpec("complex"), 0.0)


@pytest.mark.parametrize("theta", [0.2, 0.5, 0.7])
def test_single_competitor_kkt(theta):
    # h = e1, competitor at angle theta; min |a^T f| over ||f - h||^2 <= T is cos - sqrt(T)
    F = np.array([[1.0, np.cos(theta)], [0.0, np.sin(theta)]])
    T = trust_radius(F, 0)
    assert T == pytest.approx(np.sin(theta) ** 2)
    prog = build_sidco_subproblem(F, 0, VariantSpec("real"), T)
    sol = solve(prog)
    expected = max(np.cos(theta) - np.sqrt(T), 0.0)
    assert sol.objective_value == pytest.approx(expected, abs=1e-7)


def test_orthogonal_competitors_keep_column():
    F = np.eye(4)[:, :3]
    f, obj = update_column(F, 0, VariantSpec("real"), trust_radius(F, 0))
    assert obj == pytest.approx(0, abs=1e-8)
    assert abs(f @ F[:, 0]) == pytest.approx(1, abs=1e-6) or np.max(np.abs(F[:, 1:].T @ f)) <= 1e-8


@pytest.mark.parametrize("kind", ["real", "complex", "nonneg_real", "nonneg_complex", "unital",
                                  "sparse_real", "sparse_complex"])
def test_reference_is_feasible(kind):
    rng = np.random.default_rng(5)
    variant = VariantSpec(kind, lam=1.8 if kind.startswith("sparse") else 0.0)
    for _ in range(5):
        F = frame_for(kind, rng, 4, 8)
        i = int(rng.integers(8))
        T = trust_radius(F, i)
        prog = build_sidco_subproblem(F, i, variant, T)
        sol = solve(prog)
        assert sol.status == "optimal"
        h = F[:, i]
        corr = np.max(np.abs(np.delete(F, i, axis=1).conj().T @ h))
        ref = corr + (variant.l1_weight(4) * np.abs(h).sum() if kind.startswith("sparse") else 0)
        assert sol.objective_value <= ref + 1e-7


@pytest.mark.parametrize("kind", ["real", "complex", "nonneg_real", "nonneg_complex"])
def test_update_never_increases_column_correlation(kind):
    rng = np.random.default_rng(6)
    for _ in range(10):
        F = frame_for(kind, rng, 4, 9)
        i = int(rng.integers(9))
        before = np.max(np.abs(np.delete(F, i, axis=1).conj().T @ F[:, i]))
        f, _ = update_column(F, i, VariantSpec(kind), trust_radius(F, i))
        after = np.max(np.abs(np.delete(F, i, axis=1).conj().T @ f))
        assert after <= before + 1e-9
        assert np.linalg.norm(f) == pytest.approx(1, abs=1e-12)


def test_update_normalizations():
    rng = np.random.default_rng(7)
    F = frame_for("unital", rng, 5, 10)
    f, _ = update_column(F, 3, VariantSpec("unital"), trust_radius(F, 3))
    assert np.allclose(np.abs(f), 5 ** -0.5, atol=1e-12)
    F = frame_for("nonneg_complex", rng, 5, 10)
    f, _ = update_column(F, 3, VariantSpec("nonneg_complex"), trust_radius(F, 3))
    assert f.real.min() >= 0 and f.imag.min() >= 0


def test_zero_rows_respected():
    rng = np.random.default_rng(8)
    F = random_unit_frame(rng, 5, 9)
    F[[0, 3], 2] = 0
    F = normalize_columns(F)
    f, _ = update_column(F, 2, VariantSpec("sparse_complex"), trust_radius(F, 2), zero_rows=[0, 3],
                         l1_weight=0.0)
    assert f[0] == 0 and f[3] == 0
