import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agflow.flow import (AgFlowConfig, agflow_component_path, agflow_path, calibrate, deflate,
                         lambda_range, orthonormalize, subspace_targets)
from agflow.quasips import QuasiPsConfig
from agflow.ridgepath import gradient_flow_estimate, gram_eig, ridge_estimate

from conftest import synth_matrix


def test_calibration_examples():
    cfg = AgFlowConfig(step=1e-4)
    assert calibrate(1, cfg) == pytest.approx(100.0)
    assert calibrate(1000, cfg) == pytest.approx(0.1)
    gd = AgFlowConfig(step=1e-3, mode="gd")
    assert calibrate(100, gd) == pytest.approx(10.0)
    np.testing.assert_allclose(calibrate([1, 2, 4], gd), [1000, 500, 250])
    lo, hi = lambda_range(AgFlowConfig())
    assert lo == pytest.approx(1 / (5000 * np.sqrt(0.5e-4))) and hi == pytest.approx(1 / np.sqrt(0.5e-4))
    with pytest.raises(ValueError):
        calibrate(0, cfg)


def test_config_validation_and_batch():
    assert AgFlowConfig().batch_size(500) == 100
    assert AgFlowConfig().batch_size(40) == 20
    assert AgFlowConfig(mode="gd", batch=7).batch_size(40) == 40
    with pytest.raises(ValueError):
        AgFlowConfig(batch=50).batch_size(40)
    for bad in (dict(iterations=0), dict(step=0.0), dict(mode="adam"), dict(stride=0), dict(d_prime=0)):
        with pytest.raises(ValueError):
            AgFlowConfig(**bad)


def test_deflate_removes_prior_directions():
    X = synth_matrix(20, 6, seed=1)
    w = np.eye(6)[:2]
    Xd = deflate(X, list(w)).values
    np.testing.assert_allclose(Xd[:, :2], 0.0, atol=1e-12)
    np.testing.assert_allclose(Xd[:, 2:], X[:, 2:])
    with pytest.raises(ValueError, match="unit"):
        orthonormalize([np.array([2.0, 0.0])])
    with pytest.raises(ValueError, match="dependent"):
        orthonormalize([np.array([1.0, 0.0]), np.array([1.0, 0.0])])


def test_gd_matches_gradient_flow_at_matched_time():
    X = synth_matrix(40, 15, seed=2)
    y = X @ np.random.default_rng(2).standard_normal(15)
    eta, K = 1e-3, 1000
    cfg = AgFlowConfig(iterations=K, step=eta, mode="gd", d_prime=1, stride=100)
    path = agflow_component_path(X, y, cfg)
    eig = gram_eig(X)
    for k, w in zip(path.steps, path.loadings):
        gf = gradient_flow_estimate(X, y, k * eta, eig).beta
        assert abs(w @ gf) / np.linalg.norm(gf) >= 1 - 1e-4


def test_gd_tracks_ridge_with_quasips_targets_hdlss():
    # stronger than the exact-target check: noisy targets make the loading move with lambda
    X = synth_matrix(40, 200, np.concatenate([np.linspace(10, 2, 10), np.ones(190)]), seed=2)
    eta, K = 1e-2, 20000
    targets = subspace_targets(X, 2, "quasips", QuasiPsConfig(seed=0))
    pp = agflow_path(X, AgFlowConfig(iterations=K, step=eta, mode="gd", d_prime=2), targets=targets)
    eig = gram_eig(X)
    for k in np.unique(np.geomspace(1, K, 10).round().astype(int)):
        for j, t in enumerate(targets):
            b = ridge_estimate(X, t.values, 1.0 / (k * eta), eig).beta
            assert abs(pp.matrices[k - 1, :, j] @ b) / np.linalg.norm(b) >= 0.999


def test_sgd_path_shape_stride_and_unit_rows():
    X = synth_matrix(30, 10, seed=3)
    pp = agflow_path(X, AgFlowConfig(iterations=95, d_prime=2, stride=10, seed=1))
    assert len(pp) == 9 and list(pp.steps) == list(range(10, 100, 10))
    np.testing.assert_allclose(np.linalg.norm(pp.matrices, axis=1), 1.0)
    np.testing.assert_allclose(pp.lambdas, calibrate(pp.steps, AgFlowConfig()))
    assert pp.meta["batch_size"] == 15 and pp.meta["subspace"] == "quasips"
    with pytest.raises(ValueError, match="stride"):
        agflow_path(X, AgFlowConfig(iterations=5, stride=10, d_prime=1))


def test_sgd_deterministic_and_seeded():
    X = synth_matrix(30, 10, seed=4)
    a = agflow_path(X, AgFlowConfig(iterations=50, d_prime=2, seed=7))
    b = agflow_path(X, AgFlowConfig(iterations=50, d_prime=2, seed=7))
    c = agflow_path(X, AgFlowConfig(iterations=50, d_prime=2, seed=8))
    np.testing.assert_array_equal(a.matrices, b.matrices)
    assert not np.array_equal(a.matrices, c.matrices)


@settings(max_examples=20, deadline=None)
@given(st.integers(5, 30), st.integers(2, 40), st.integers(0, 1000))
def test_gd_norms_nondecreasing(n, d, seed):
    X = synth_matrix(n, d, np.linspace(3, 0.5, d), seed=seed)
    y = X @ np.random.default_rng(seed).standard_normal(d)
    lmax = np.linalg.eigvalsh(X.T @ X / n)[-1]
    cfg = AgFlowConfig(iterations=200, step=0.9 / lmax, mode="gd", d_prime=1)
    comp = agflow_component_path(X, y, cfg)
    assert np.all(np.diff(comp.norms) >= -1e-12 * comp.norms.max())
    np.testing.assert_allclose(np.linalg.norm(comp.coefficients(), axis=1), comp.norms)


def test_endpoint_approaches_svd_direction():
    X = synth_matrix(60, 8, seed=5)
    targets = subspace_targets(X, 2, "exact_svd")
    pp = agflow_path(X, AgFlowConfig(iterations=3000, d_prime=2, seed=0), targets=targets)
    for j, t in enumerate(targets):
        assert abs(pp.matrices[-1, :, j] @ t.direction) > 0.99


def test_gd_wide_data_route_matches_gram_route():
    X = synth_matrix(10, 30, seed=6)
    y = X[:, 0].copy()
    cfg = AgFlowConfig(iterations=50, step=0.05, mode="gd", d_prime=1)
    wide = agflow_component_path(X, y, cfg)
    tall = agflow_component_path(np.vstack([X, np.zeros((25, 30))]), np.concatenate([y, np.zeros(25)]),
                                 AgFlowConfig(iterations=50, step=0.05 * 35 / 10, mode="gd", d_prime=1))
    np.testing.assert_allclose(wide.loadings, tall.loadings, atol=1e-10)


def test_target_length_checked():
    with pytest.raises(ValueError, match="length"):
        agflow_component_path(np.ones((4, 2)), np.ones(3), AgFlowConfig(d_prime=1))
    with pytest.raises(ValueError, match="d_prime"):
        subspace_targets(np.ones((4, 2)), 3)
