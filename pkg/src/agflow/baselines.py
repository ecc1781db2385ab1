"""Unpenalised PCA baselines: exact SVD, deflated power iteration, Oja."""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dataio import DataMatrix
from .linalg import fix_signs, thin_svd

METHODS = ("svd", "power", "oja", "quasips", "ridge", "agflow")


@dataclass
class Loadings:
    matrix: np.ndarray  # d x d', unit columns
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown loadings method {self.method!r}")


def _values(X):
    return X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)


def _check_dprime(A, d_prime):
    n, d = A.shape
    if not 1 <= d_prime <= min(n, d):
        raise ValueError(f"d_prime must be in [1, {min(n, d)}], got {d_prime}")


def _unit(v):
    return v / np.linalg.norm(v)


def svd_pca(X, d_prime):
    A = _values(X)
    _check_dprime(A, d_prime)
    V = thin_svd(A).V[:, :d_prime]
    return Loadings(np.array(V), "svd", {"d_prime": d_prime})


def power_iteration(X, d_prime, iters=200, seed=0):
    """Hotelling-deflated power method on G = X^T X / n."""
    A = _values(X)
    _check_dprime(A, d_prime)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    n, d = A.shape
    G = A.T @ A / n
    cols = []
    for j in range(d_prime):
        rng = np.random.default_rng([seed, j])
        w = _unit(rng.standard_normal(d))
        for _ in range(iters):
            z = G @ w
            nz = np.linalg.norm(z)
            if nz == 0.0:
                break
            w = z / nz
        cols.append(fix_signs(w))
        G = G - (w @ G @ w) * np.outer(w, w)
    return Loadings(np.column_stack(cols), "power", {"iters": iters, "seed": seed})


def oja_pca(X, d_prime, epochs=20, step=None, seed=0):
    """Single-vector Oja per component over shuffled passes; the data are
    deflated by each found direction before the next one starts.

    ``step`` defaults to 1/(rbar * n) with rbar the mean squared row norm.
    """
    A = _values(X).copy()
    _check_dprime(A, d_prime)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    n, d = A.shape
    if step is None:
        rbar = float(np.mean(np.sum(A * A, axis=1)))
        if rbar == 0.0:
            raise ValueError("cannot derive a default step for an all-zero matrix")
        step = 1.0 / (rbar * n)
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    cols = []
    for j in range(d_prime):
        rng = np.random.default_rng([seed, j])
        w0 = _unit(rng.standard_normal(d))
        order = np.concatenate([rng.permutation(n) for _ in range(epochs)])
        w = kernels.oja(np.ascontiguousarray(A), w0, float(step), order)
        w = fix_signs(_unit(w))
        cols.append(w)
        A = A - np.outer(A @ w, w)
    return Loadings(np.column_stack(cols), "oja", {"epochs": epochs, "step": step, "seed": seed})
