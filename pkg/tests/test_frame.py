import numpy as np
import pytest

from conftest import random_unit_frame
from incoherent_frames.frame import (FrameError, coherence, fp_upper_bound, frame_potential, gram,
                                     mutual_coherence, normalize_columns, papr, polar_retraction,
                                     unit_modulus, welch_bound)
from incoherent_frames.oracle import naive_coherence


def mercedes():
    ang = np.array([0, 2, 4]) * np.pi / 3
    return np.vstack([np.cos(ang), np.sin(ang)])


def test_identity_summary():
    g = coherence(np.eye(3))
    assert g.coherence == 0
    assert g.frame_potential == pytest.approx(3)
    assert g.tightness_gap == pytest.approx(0, abs=1e-15)


def test_mercedes_benz():
    g = coherence(mercedes())
    assert g.coherence == pytest.approx(0.5, abs=1e-15)
    assert g.tightness_gap == pytest.approx(0, abs=1e-12)


def test_degenerate_inputs():
    F = np.eye(3)
    F[:, 1] = 0
    with pytest.raises(FrameError, match="degenerate column"):
        coherence(F)
    with pytest.raises(FrameError, match="invalid dimensions"):
        coherence(np.ones((3, 1)))
    with pytest.raises(FrameError, match="invalid dimensions"):
        coherence(np.ones((0, 4)))


def test_coherence_uses_normalized_definition(rng):
    F = random_unit_frame(rng, 4, 9)
    scaled = F * rng.uniform(0.1, 10, size=9)
    assert coherence(scaled).coherence == pytest.approx(mutual_coherence(F), abs=1e-14)


def test_summary_invariants(rng):
    for _ in range(20):
        m, n = rng.integers(2, 7), rng.integers(7, 15)
        F = random_unit_frame(rng, m, n, cplx=bool(rng.integers(2)))
        g = coherence(F)
        G = gram(F)
        off = np.abs(G - np.diag(np.diag(G)))
        assert g.coherence == pytest.approx(off.max(), abs=1e-14)
        i, j = g.argmax_pair
        assert i < j and abs(G[i, j]) == pytest.approx(g.coherence, abs=1e-14)
        assert g.frame_potential >= n * n / m - 1e-9
        assert g.gram_eigenvalues.sum() == pytest.approx(n, abs=1e-9)
        # two independent frame-potential computations agree
        assert np.sum(np.abs(G) ** 2) == pytest.approx(np.sum(g.gram_eigenvalues ** 2), abs=1e-9)
        assert frame_potential(F) == pytest.approx(g.frame_potential, abs=1e-9)


def test_coherence_invariances(rng):
    F = random_unit_frame(rng, 5, 11)
    mu = mutual_coherence(F)
    perm = rng.permutation(11)
    phases = np.exp(2j * np.pi * rng.random(11))
    assert mutual_coherence(F[:, perm]) == pytest.approx(mu, abs=1e-14)
    assert mutual_coherence(F * phases) == pytest.approx(mu, abs=1e-14)


def test_naive_coherence_agrees(rng):
    for _ in range(1000):
        m, n = rng.integers(1, 5), rng.integers(2, 7)
        F = random_unit_frame(rng, m, n, cplx=bool(rng.integers(2))) * rng.uniform(0.5, 2, n)
        assert abs(naive_coherence(F) - coherence(F).coherence) <= 1e-13


def test_welch_bound_values():
    assert welch_bound(4, 7) == pytest.approx(0.353553, abs=1e-6)
    assert welch_bound(5, 5) == 0
    assert welch_bound(28, 64) == pytest.approx(1 / 7, abs=1e-15)
    assert welch_bound(2, 3) == pytest.approx(0.5)
    with pytest.raises(FrameError):
        welch_bound(5, 3)
    wb, loose = welch_bound(2, 7, return_flag=True)
    assert loose and wb == pytest.approx(np.sqrt(5 / 12))
    assert welch_bound(3, 8, return_flag=True)[1] is False


def test_polar_retraction():
    rng = np.random.default_rng(1)
    F = rng.standard_normal((3, 6))
    U = polar_retraction(F, normalize=False)
    s = np.linalg.svd(U, compute_uv=False)
    assert np.ptp(s) <= 1e-9
    T = mercedes()
    assert np.allclose(polar_retraction(T), T, atol=1e-9)
    # the polar factor maps equal columns to equal columns, so a duplicated pair stays coherent
    bad = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    out = polar_retraction(bad)
    assert np.allclose(out[:, 0], out[:, 1]) and mutual_coherence(out) == pytest.approx(1.0)
    # a nearly duplicated pair is pulled apart
    near = np.array([[1.0, 1.0, 0.0], [0.0, 0.1, 1.0]])
    assert coherence(polar_retraction(near)).coherence < coherence(near).coherence
    with pytest.raises(FrameError, match="rank deficient"):
        polar_retraction(np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]))


def test_polar_retraction_alpha():
    rng = np.random.default_rng(2)
    F = rng.standard_normal((3, 6))
    U = polar_retraction(F, alpha=2.0, normalize=False)
    assert np.allclose(np.linalg.svd(U, compute_uv=False), 2.0)


def test_fp_upper_bound():
    assert fp_upper_bound(5, 10, 1.0) == pytest.approx(20.0)
    assert fp_upper_bound(5, 10, 1.2) == pytest.approx(24.4)
    assert fp_upper_bound(7, 30, 1.7) >= 30 ** 2 / 7
    with pytest.raises(FrameError, match="below Welch bound"):
        fp_upper_bound(5, 10, 0.9)


def test_normalize_and_unit_modulus(rng):
    F = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
    N = normalize_columns(F)
    assert np.allclose(np.linalg.norm(N, axis=0), 1, atol=1e-12)
    U = unit_modulus(F)
    assert np.allclose(np.abs(U), 0.5, atol=1e-12)
    assert np.allclose(papr(U), 1.0, atol=1e-12)
    R = normalize_columns(rng.standard_normal((3, 4)))
    assert not np.iscomplexobj(R)
