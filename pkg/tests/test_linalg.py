import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agflow.linalg import fix_signs, phi_filter, sign_flips, spectral_phi, sym_eig, thin_svd


def series_phi(G, t, terms=80):
    """sum_{m>=1} (-1)^{m+1} t^m G^{m-1} / m!  ==  G^+ (I - exp(-tG)) on range(G) + t I on null(G)."""
    out = np.zeros_like(G)
    P = np.eye(G.shape[0])
    for m in range(1, terms):
        out += (-1) ** (m + 1) * t ** m / math.factorial(m) * P
        P = P @ G
    return out


def test_spectral_phi_matches_series():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((6, 4))
    G = A.T @ A / 6
    for t in (0.0, 0.3, 1.0, 2.5):
        np.testing.assert_allclose(spectral_phi(G, t), series_phi(G, t), atol=1e-10)


def test_spectral_phi_singular_limit():
    # rank-1 G: null direction must receive t, not 0 or inf
    v = np.array([3.0, 4.0]) / 5.0
    G = 2.0 * np.outer(v, v)
    np.testing.assert_allclose(spectral_phi(G, 0.7), series_phi(G, 0.7), atol=1e-12)
    w = np.array([-4.0, 3.0]) / 5.0
    assert w @ spectral_phi(G, 0.7) @ w == pytest.approx(0.7)


def test_spectral_phi_rejects_bad_input():
    with pytest.raises(ValueError):
        spectral_phi(np.eye(2), -1.0)
    with pytest.raises(ValueError):
        spectral_phi(np.diag([1.0, -1.0]), 1.0)
    with pytest.raises(ValueError):
        sym_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_phi_filter_values():
    f = phi_filter(np.array([2.0, 0.0]), 0.5)
    assert f[0] == pytest.approx((1 - np.exp(-1.0)) / 2.0)
    assert f[1] == 0.5


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 10_000))
def test_thin_svd_reconstructs_and_signs(n, d, seed):
    X = np.random.default_rng(seed).standard_normal((n, d))
    s = thin_svd(X)
    np.testing.assert_allclose((s.U * s.S) @ s.V.T, X, atol=1e-10)
    np.testing.assert_allclose(s.V.T @ s.V, np.eye(s.V.shape[1]), atol=1e-10)
    piv = s.V[np.argmax(np.abs(s.V), axis=0), np.arange(s.V.shape[1])]
    assert np.all(piv > 0)
    assert np.all(np.diff(s.S) <= 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10_000))
def test_sym_eig_reconstructs(d, seed):
    A = np.random.default_rng(seed).standard_normal((d, d))
    A = A + A.T
    e = sym_eig(A)
    np.testing.assert_allclose((e.eigenvectors * e.eigenvalues) @ e.eigenvectors.T, A, atol=1e-10)
    assert np.all(np.diff(e.eigenvalues) <= 0)


def test_sign_convention_ties_lowest_index():
    M = np.array([[-1.0, 0.0], [1.0, 0.0]])
    assert list(sign_flips(M)) == [-1.0, 1.0]
    np.testing.assert_array_equal(fix_signs(np.array([0.5, -0.5])), [0.5, -0.5])
    np.testing.assert_array_equal(fix_signs(np.array([-0.5, 0.5])), [0.5, -0.5])
