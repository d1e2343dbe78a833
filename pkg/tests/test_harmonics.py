import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import special_ortho_group

from mfbm.errors import ParameterError
from mfbm.harmonics import (
    HarmonicIndex,
    enumerate_indices,
    eval_degree,
    eval_harmonic,
    harmonic_count,
    normalization,
    sphere_area,
    sphere_quadrature,
    zonal_sum,
)


def test_counts_small_cases():
    assert [harmonic_count(m, 2) for m in range(5)] == [1, 2, 2, 2, 2]
    assert [harmonic_count(m, 3) for m in range(5)] == [1, 3, 5, 7, 9]
    assert harmonic_count(2, 4) == 9


def test_count_overflow():
    with pytest.raises(OverflowError):
        harmonic_count(10**6, 40)


@pytest.mark.parametrize("N", range(2, 8))
def test_enumeration_length_and_order(N):
    for m in range(21 if N <= 5 else 12):
        idx = enumerate_indices(m, N)
        assert len(idx) == harmonic_count(m, N)
        assert [i.linear_index for i in idx] == list(range(1, len(idx) + 1))
        keys = [i.full_chain + (-i.sign,) for i in idx]
        assert keys == sorted(keys)


def test_enumeration_n2_and_n3():
    assert [(i.chain, i.sign) for i in enumerate_indices(2, 2)] == [((), 1), ((), -1)]
    idx3 = enumerate_indices(1, 3)
    assert [(i.chain, i.sign) for i in idx3] == [((0,), 1), ((1,), 1), ((1,), -1)]


def test_bad_inputs():
    with pytest.raises(ParameterError):
        enumerate_indices(-1, 3)
    with pytest.raises(ParameterError):
        harmonic_count(2, 1)
    with pytest.raises(ParameterError):
        eval_harmonic(enumerate_indices(1, 3)[0], [1.0, 1.0, 0.0])


def test_circle_harmonics_are_fourier_modes():
    phi = np.linspace(0, 2 * math.pi, 13)
    x = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    plus, minus = enumerate_indices(3, 2)
    np.testing.assert_allclose(eval_harmonic(plus, x), np.cos(3 * phi) / math.sqrt(math.pi), atol=1e-14)
    np.testing.assert_allclose(np.abs(eval_harmonic(minus, x)), np.abs(np.sin(3 * phi)) / math.sqrt(math.pi), atol=1e-14)
    assert eval_harmonic(enumerate_indices(0, 2)[0], x[0]) == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_normalization_matches_quadrature():
    # squared norms of the unnormalised complex harmonics
    from mfbm.harmonics import _complex_harmonic

    for N in (3, 4, 5):
        pts, w = sphere_quadrature(N, 8)
        for m in range(4):
            for idx in enumerate_indices(m, N):
                if idx.sign < 0:
                    continue
                val = _complex_harmonic(idx.full_chain, pts)
                assert np.dot(w, np.abs(val) ** 2) == pytest.approx(normalization(idx, N), rel=1e-12)


def test_sphere_quadrature_total_area():
    for N in (2, 3, 4, 5):
        _, w = sphere_quadrature(N, 4)
        assert w.sum() == pytest.approx(sphere_area(N), rel=1e-14)


@pytest.mark.parametrize("N,mmax", [(2, 6), (3, 6), (4, 4)])
def test_gram_identity(N, mmax):
    pts, w = sphere_quadrature(N, mmax + 2)
    Y = np.concatenate([eval_degree(m, pts) for m in range(mmax + 1)], axis=1)
    G = (Y * w[:, None]).T @ Y
    assert np.max(np.abs(G - np.eye(G.shape[0]))) <= 1e-8


def test_eval_degree_matches_single_evaluation():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(5, 4))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    D = eval_degree(3, x)
    for col, idx in enumerate(enumerate_indices(3, 4)):
        np.testing.assert_allclose(D[:, col], eval_harmonic(idx, x), rtol=0, atol=0)


def test_poles_are_regular():
    # points on the x_N axis make every intermediate radius vanish
    for N in (3, 4):
        e = np.zeros(N)
        e[-1] = 1.0
        vals = eval_degree(4, e[None, :])
        assert np.all(np.isfinite(vals))


@settings(max_examples=30, deadline=None)
@given(N=st.integers(2, 5), m=st.integers(0, 6), seed=st.integers(0, 2**32 - 1))
def test_addition_theorem(N, m, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, N))
    x /= np.linalg.norm(x)
    y /= np.linalg.norm(y)
    lhs = math.fsum(eval_degree(m, x[None])[0] * eval_degree(m, y[None])[0])
    assert lhs == pytest.approx(zonal_sum(m, N, float(x @ y)), rel=1e-10, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(N=st.integers(2, 4), m=st.integers(0, 5), seed=st.integers(0, 2**32 - 1))
def test_degree_sum_rotation_invariant(N, m, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, N))
    x /= np.linalg.norm(x)
    y /= np.linalg.norm(y)
    Q = special_ortho_group.rvs(N, random_state=seed % (2**32)) if N > 1 else np.eye(1)
    a = eval_degree(m, np.stack([x, y]))
    b = eval_degree(m, np.stack([Q @ x, Q @ y]))
    assert math.fsum(a[0] * a[1]) == pytest.approx(math.fsum(b[0] * b[1]), rel=1e-10, abs=1e-12)


def test_diagonal_sum_is_count_over_area():
    x = np.array([[0.6, 0.0, 0.8]])
    assert np.sum(eval_degree(5, x) ** 2) == pytest.approx(harmonic_count(5, 3) / sphere_area(3), rel=1e-13)


def test_index_properties():
    idx = HarmonicIndex(3, (2, 1), -1, 7)
    assert idx.full_chain == (3, 2, 1)
    assert idx.last == 1
