"""Quasi-principal subspace: a cheap variance-reduced estimate of the
dominant direction, projected back onto the samples."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataio import DataMatrix
from .linalg import fix_signs

N_SPARE = 4


@dataclass(frozen=True)
class QuasiPsConfig:
    step: float | None = None  # None -> 1 / (rbar * n)
    epoch_length: int | None = None  # None -> n
    iterations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.epoch_length is not None and self.epoch_length < 1:
            raise ValueError("epoch_length must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")

    def resolve(self, X):
        """Concrete (step, epoch_length) for data matrix ``X``."""
        A = X.values if isinstance(X, DataMatrix) else X
        n = A.shape[0]
        step = self.step
        if step is None:
            rbar = mean_squared_row_norm(A)
            if rbar == 0.0:
                raise ValueError("degenerate all-zero data matrix: default step 1/(rbar*n) is undefined")
            step = 1.0 / (rbar * n)
        return float(step), int(self.epoch_length or n)


@dataclass
class SubspaceTarget:
    values: np.ndarray  # X @ direction
    component_index: int
    direction: np.ndarray
    history: np.ndarray | None = None  # epoch anchors w~_1..w~_L, one per row


def mean_squared_row_norm(X):
    A = X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)
    return float(np.mean(np.einsum("ij,ij->i", A, A)))


def quasi_ps(X, j, cfg=QuasiPsConfig(), keep_history=False):
    """Estimate the ``j``-th (1-based) quasi-principal subspace of ``X``.

    For ``j > 1`` the caller passes data already deflated by the earlier
    directions; ``j`` only selects the random stream.
    """
    A = np.ascontiguousarray(X.values if isinstance(X, DataMatrix) else X, dtype=float)
    n, d = A.shape
    if not 1 <= j <= min(n, d):
        raise ValueError(f"component index j must be in [1, {min(n, d)}], got {j}")
    step, M = cfg.resolve(A)
    rng = np.random.default_rng([cfg.seed, j])
    w0 = rng.standard_normal(d)
    w0 /= np.linalg.norm(w0)
    idx = rng.integers(0, n, size=(cfg.iterations, M))
    spare = rng.standard_normal((N_SPARE, d))
    spare /= np.linalg.norm(spare, axis=1, keepdims=True)

    hist = kernels.vr_pca(A, w0, step, idx, spare)
    w = hist[-1]
    w = fix_signs(w / np.linalg.norm(w))
    return SubspaceTarget(A @ w, j, w, hist if keep_history else None)
