"""Approximated gradient flow: the implicit-regularisation path of
penalised PCA loadings, one least-squares SGD/GD run per component."""

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from ._jit import backend
from .dataio import DataMatrix
from .linalg import sign_flips, thin_svd
from .paths import ProjectionPath
from .quasips import QuasiPsConfig, SubspaceTarget, quasi_ps

MODES = ("sgd", "gd")
CALIBRATION_CONSTANT = 1.0
_BATCH_CHUNK = 1 << 22


@dataclass(frozen=True)
class AgFlowConfig:
    iterations: int = 5000
    step: float = 0.5e-4
    batch: int | None = None  # None -> min(100, n // 2); gd mode always uses n
    d_prime: int = 30
    mode: str = "sgd"
    stride: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (self.step > 0 and np.isfinite(self.step)):
            raise ValueError(f"step must be positive, got {self.step}")
        if self.batch is not None and self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.d_prime < 1:
            raise ValueError("d_prime must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    def batch_size(self, n):
        if self.mode == "gd":
            return n
        m = self.batch if self.batch is not None else max(1, min(100, n // 2))
        if m > n:
            raise ValueError(f"batch size {m} exceeds the {n} available samples")
        return m

    def to_dict(self):
        return asdict(self)


def calibrate(k, cfg):
    """Penalty equivalent of iteration ``k``: 1/(k sqrt(eta)) for SGD,
    1/(k eta) for full-batch GD (t = k eta, lambda = 1/t)."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise ValueError("iteration index must be >= 1")
    scale = np.sqrt(cfg.step) if cfg.mode == "sgd" else cfg.step
    lam = CALIBRATION_CONSTANT / (k * scale)
    return float(lam) if lam.ndim == 0 else lam


def lambda_range(cfg):
    return calibrate(cfg.iterations, cfg), calibrate(1, cfg)


def _values(X):
    return X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)


def orthonormalize(vectors, tol=1e-10):
    """Gram-Schmidt over unit vectors; raises on non-unit or dependent input."""
    out = []
    for v in vectors:
        v = np.asarray(v, dtype=float)
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValueError("prior loadings must be unit vectors")
        for q in out:
            v = v - (q @ v) * q
        nv = np.linalg.norm(v)
        if nv < tol:
            raise ValueError("prior loadings are linearly dependent")
        out.append(v / nv)
    return out


def deflate(X, prior_loadings):
    """X (I - sum_j w_j w_j^T) for the orthonormalised prior loadings."""
    A = _values(X)
    means = X.column_means if isinstance(X, DataMatrix) else np.zeros(A.shape[1])
    Q = orthonormalize(prior_loadings)
    if Q:
        W = np.column_stack(Q)
        A = A - (A @ W) @ W.T
    else:
        A = A.copy()
    return DataMatrix(A, means)


def subspace_targets(X, d_prime, source="quasips", cfg=None):
    """Targets Y^1..Y^d' for the per-component regressions.

    ``exact_svd`` uses U_j S_j; ``quasips`` runs the variance-reduced
    estimator on data deflated by the previously found directions.
    """
    A = _values(X)
    n, d = A.shape
    if not 1 <= d_prime <= min(n, d):
        raise ValueError(f"d_prime must be in [1, {min(n, d)}], got {d_prime}")
    if source == "exact_svd":
        svd = thin_svd(A)
        return [SubspaceTarget(svd.U[:, j] * svd.S[j], j + 1, svd.V[:, j]) for j in range(d_prime)]
    if source != "quasips":
        raise ValueError(f"unknown subspace source {source!r}")
    cfg = cfg or QuasiPsConfig()
    out = []
    for j in range(1, d_prime + 1):
        Xj = deflate(A, [t.direction for t in out]).values if out else A
        out.append(quasi_ps(Xj, j, cfg))
    return out


@dataclass
class LoadingPath:
    component_index: int
    steps: np.ndarray
    loadings: np.ndarray  # rows are unit, sign-normalised loadings
    norms: np.ndarray  # ||beta_k|| before normalisation
    signs: np.ndarray  # sign applied by the convention
    lambdas: np.ndarray
    valid: np.ndarray

    def coefficients(self):
        """Unnormalised iterates beta_k."""
        return self.loadings * (self.signs * self.norms)[:, None]


def _batches(rng, n, m, K):
    if m == n:
        return np.broadcast_to(np.arange(n), (K, n)).copy()
    out = np.empty((K, m), dtype=np.int64)
    rows = max(1, _BATCH_CHUNK // n)
    for s in range(0, K, rows):
        keys = rng.random((min(rows, K - s), n))
        out[s:s + keys.shape[0]] = np.argpartition(keys, m - 1, axis=1)[:, :m]
    return out


def agflow_component_path(X, target, cfg, j=None):
    """Iterate least squares of ``target`` on ``X`` from zero and record the
    normalised iterate at every ``cfg.stride``-th step."""
    A = np.ascontiguousarray(_values(X), dtype=float)
    n, d = A.shape
    y = np.ascontiguousarray(target.values if isinstance(target, SubspaceTarget) else target, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"target must have length {n}, got shape {y.shape}")
    if j is None:
        j = target.component_index if isinstance(target, SubspaceTarget) else 1
    K, eta = cfg.iterations, float(cfg.step)
    if K // cfg.stride < 1:
        raise ValueError("stride exceeds the number of iterations; nothing would be recorded")

    if cfg.mode == "gd":
        if d <= n:
            raw, norms = kernels.gd_path_gram(A.T @ A, A.T @ y, eta, float(n), K, cfg.stride)
        else:
            raw, norms = kernels.gd_path_data(A, y, eta, K, cfg.stride)
    else:
        rng = np.random.default_rng([cfg.seed, j])
        batches = _batches(rng, n, cfg.batch_size(n), K)
        raw, norms = kernels.sgd_path(A, y, eta, batches, cfg.stride)

    signs = sign_flips(raw.T) if raw.size else np.ones(0)
    loadings = raw * signs[:, None]
    steps = cfg.stride * np.arange(1, raw.shape[0] + 1)
    return LoadingPath(j, steps, loadings, norms, signs, calibrate(steps, cfg), norms > 0)


def agflow_path(X, cfg=AgFlowConfig(), subspace_cfg=None, subspace="quasips", targets=None):
    """Run the component paths for j = 1..d' and stack them into a
    :class:`ProjectionPath` (one shared k across components)."""
    A = _values(X)
    n, d = A.shape
    cfg.batch_size(n)
    t0 = time.perf_counter()
    source = subspace if targets is None else "given"
    if targets is None:
        targets = subspace_targets(A, cfg.d_prime, subspace, subspace_cfg)
    elif len(targets) != cfg.d_prime:
        raise ValueError(f"expected {cfg.d_prime} targets, got {len(targets)}")
    t_sub = time.perf_counter() - t0

    comps = [agflow_component_path(A, t, cfg, j=t.component_index) for t in targets]
    steps = comps[0].steps
    mats = np.stack([c.loadings for c in comps], axis=2)
    valid = np.stack([c.valid for c in comps], axis=1)
    lo, hi = lambda_range(cfg)
    meta = {
        "config": cfg.to_dict(),
        "batch_size": cfg.batch_size(n),
        "subspace": source,
        "calibration_constant": CALIBRATION_CONSTANT,
        "lambda_range": [lo, hi],
        "n": n,
        "d": d,
        "backend": backend(),
    }
    if subspace_cfg is not None:
        meta["quasips"] = asdict(subspace_cfg)
    pp = ProjectionPath(steps, calibrate(steps, cfg), mats, valid, "agflow", meta)
    # wall-clock figures stay off ``meta`` so written paths are reproducible
    pp.timings = {"subspace": t_sub, "total": time.perf_counter() - t0}
    return pp
