"""Explicit l2 reference: closed-form ridge over a penalty grid, the exact
gradient-flow solution, and the Monte-Carlo risk comparison between them.

Everything here is solved in the eigenbasis of X^T X, computed once per
data matrix and reused for every penalty / time value.
"""

from dataclasses import dataclass

import numpy as np

from .dataio import DataMatrix, center, generate_synthetic
from .linalg import fix_signs, phi_filter, rank_tolerance, sym_eig
from .paths import ProjectionPath

SOURCES = ("ridge", "ols", "gradient_flow", "sgd_path")


@dataclass
class Coefficients:
    beta: np.ndarray
    source: str
    reg: float

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown coefficient source {self.source!r}")
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("coefficients are not finite")


def _values(X):
    return X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)


def gram_eig(X):
    A = _values(X)
    return sym_eig(A.T @ A)


def default_grid(lo=1e-4, hi=1e4, num=100):
    """Log-spaced penalties, strongest first."""
    return np.logspace(np.log10(hi), np.log10(lo), num)


def parse_grid(text):
    """``"lo:hi:num"`` -> :func:`default_grid` arguments."""
    try:
        lo, hi, num = text.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        raise ValueError(f"grid must look like 'lo:hi:num', got {text!r}") from None
    if not (0 < lo <= hi) or num < 1:
        raise ValueError(f"invalid grid {text!r}")
    return default_grid(lo, hi, num)


def check_grid(grid):
    g = np.asarray(grid, dtype=float).ravel()
    if g.size == 0:
        raise ValueError("lambda grid is empty")
    if np.any(~np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("lambda grid values must be finite and positive")
    if np.any(np.diff(g) > 0):
        raise ValueError("lambda grid must be sorted nonincreasing")
    return g


def ridge_estimate(X, Y, lam, eig=None):
    """(X^T X + n*lam*I)^{-1} X^T Y."""
    A = _values(X)
    Y = np.asarray(Y, dtype=float)
    n = A.shape[0]
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")
    eig = eig or sym_eig(A.T @ A)
    e, V = eig.eigenvalues, eig.eigenvectors
    if lam == 0 and e[-1] <= rank_tolerance(e):
        raise ValueError("singular system: lambda = 0 with a rank-deficient Gram matrix")
    z = V.T @ (A.T @ Y)
    beta = V @ (z / (np.maximum(e, 0.0) + n * lam))
    return Coefficients(beta, "ols" if lam == 0 else "ridge", float(lam))


def gradient_flow_estimate(X, Y, t, eig=None):
    """Exact solution at time t of d(beta)/dt = X^T (Y - X beta) / n, beta(0) = 0."""
    if t < 0 or not np.isfinite(t):
        raise ValueError(f"t must be finite and >= 0, got {t}")
    A = _values(X)
    n = A.shape[0]
    eig = eig or sym_eig(A.T @ A)
    V = eig.eigenvectors
    z = V.T @ (A.T @ np.asarray(Y, dtype=float))
    beta = V @ (phi_filter(eig.eigenvalues, t / n) * z)
    return Coefficients(beta, "gradient_flow", float(t))


def ridge_pca_path(X, d_prime, grid=None, subspace_source="exact_svd", quasips_cfg=None,
                   eig=None, targets=None):
    """Normalised ridge loadings for the top ``d_prime`` subspaces at every
    penalty in ``grid``.

    Returns a :class:`ProjectionPath` whose ``steps`` are 1-based grid
    positions. Entries whose unnormalised coefficient vanishes are marked
    invalid in ``valid`` and listed in ``meta["degenerate"]``.
    """
    from .flow import subspace_targets

    A = _values(X)
    n, d = A.shape
    grid = check_grid(default_grid() if grid is None else grid)
    if targets is None:
        targets = subspace_targets(A, d_prime, subspace_source, quasips_cfg)
    eig = eig or sym_eig(A.T @ A)
    e, V = np.maximum(eig.eigenvalues, 0.0), eig.eigenvectors

    mats = np.empty((grid.size, d, d_prime))
    valid = np.ones((grid.size, d_prime), dtype=bool)
    degenerate = []
    denom = e[:, None] + n * grid[None, :]
    for j, tgt in enumerate(targets):
        z = V.T @ (A.T @ tgt.values)
        B = V @ (z[:, None] / denom)
        norms = np.linalg.norm(B, axis=0)
        bad = ~(norms > 0)
        norms[bad] = 1.0
        B = fix_signs(B / norms)
        B[:, bad] = 0.0
        valid[bad, j] = False
        degenerate += [(j + 1, float(grid[g])) for g in np.flatnonzero(bad)]
        mats[:, :, j] = B.T
    meta = {"d_prime": d_prime, "subspace_source": subspace_source, "grid_size": int(grid.size),
            "lambda_max": float(grid[0]), "lambda_min": float(grid[-1]), "degenerate": degenerate}
    return ProjectionPath(np.arange(1, grid.size + 1), grid, mats, valid, "ridge", meta)


@dataclass
class RiskTable:
    t: np.ndarray
    risk_gf: np.ndarray
    risk_ridge: np.ndarray
    ratio: np.ndarray
    se: np.ndarray  # standard error of ``ratio``
    risk_ols: float
    trials: int

    def rows(self):
        for i in range(self.t.size):
            yield {"t": float(self.t[i]), "risk_gf": float(self.risk_gf[i]),
                   "risk_ridge": float(self.risk_ridge[i]), "ratio": float(self.ratio[i]),
                   "se": float(self.se[i])}


def risk_ratio_experiment(spec, t_grid, trials=200, seed=0):
    """Monte-Carlo Risk(gf(t)) vs Risk(ridge(1/t)) with Risk = E||b - b*||^2.

    The design matrix is drawn once from ``spec`` (then centred) and held
    fixed; each trial draws a fresh noise vector of scale ``spec.noise_sd``.
    """
    if spec.true_beta is None:
        raise ValueError("risk experiment needs spec.true_beta")
    if trials < 30:
        raise ValueError("risk experiment needs at least 30 trials")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise ValueError("t grid must be positive")
    A = center(generate_synthetic(spec)).values
    n = A.shape[0]
    beta = np.asarray(spec.true_beta, dtype=float)
    eig = sym_eig(A.T @ A)
    e, V = np.maximum(eig.eigenvalues, 0.0), eig.eigenvectors

    rng = np.random.default_rng([seed, 1])
    noise = spec.noise_sd * rng.standard_normal((n, trials))
    Z = V.T @ (A.T @ (A @ beta[:, None] + noise))
    b_star = V.T @ beta  # errors measured in the eigenbasis (orthogonal, so norms agree)

    def sq_err(filt):
        return np.sum((filt[:, None] * Z - b_star[:, None]) ** 2, axis=0)

    risk_gf, risk_ridge, ratio, se = (np.empty(t_grid.size) for _ in range(4))
    for i, t in enumerate(t_grid):
        a = sq_err(phi_filter(e, t / n))
        b = sq_err(1.0 / (e + n / t))
        ma, mb = a.mean(), b.mean()
        risk_gf[i], risk_ridge[i] = ma, mb
        ratio[i] = ma / mb
        # delta-method standard error of a ratio of paired means
        se[i] = np.std(a - ratio[i] * b, ddof=1) / (np.sqrt(trials) * mb)

    tol = rank_tolerance(e)
    inv = np.where(e > tol, 1.0 / np.where(e > tol, e, 1.0), 0.0)
    risk_ols = float(sq_err(inv).mean())
    return RiskTable(t_grid, risk_gf, risk_ridge, ratio, se, risk_ols, trials)
