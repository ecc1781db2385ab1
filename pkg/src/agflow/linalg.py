"""Dense symmetric eigendecomposition, thin SVD and the gradient-flow
spectral filter, all with a deterministic sign convention."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SymEig:
    eigenvalues: np.ndarray  # nonincreasing
    eigenvectors: np.ndarray  # columns


@dataclass(frozen=True)
class ThinSvd:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        if self.S.size == 0 or self.S[0] == 0.0:
            return 0
        tol = max(self.U.shape[0], self.V.shape[0]) * self.S[0] * np.finfo(float).eps
        return int(np.sum(self.S > tol))


def _check_finite(A, name="matrix"):
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def sign_flips(M):
    """Per-column signs (+1/-1) that make each column's largest-magnitude
    entry positive; ties go to the lowest index."""
    M = np.atleast_2d(M)
    if M.shape[0] == 0:
        return np.ones(M.shape[1])
    pivot = np.argmax(np.abs(M), axis=0)
    s = np.sign(M[pivot, np.arange(M.shape[1])])
    s[s == 0] = 1.0
    return s


def fix_signs(M):
    """Apply the sign convention to the columns of ``M`` (1-D input is one column)."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        return M * sign_flips(M[:, None])[0]
    return M * sign_flips(M)


def fix_signs_rows(M):
    """Sign convention applied to every row of a 2-D array (a stack of vectors)."""
    M = np.asarray(M, dtype=float)
    if M.shape[0] == 0:
        return M.copy()
    return M * sign_flips(M.T)[:, None]


def sym_eig(A):
    A = _check_finite(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    A = 0.5 * (A + A.T)
    w, V = np.linalg.eigh(A)
    order = np.argsort(w, kind="stable")[::-1]
    w, V = w[order], V[:, order]
    return SymEig(w, fix_signs(V))


def thin_svd(X):
    X = _check_finite(X)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    U, S, Vt = np.linalg.svd(X, full_matrices=False)
    s = sign_flips(Vt.T)
    return ThinSvd(U * s, S, Vt.T * s)


def rank_tolerance(eigenvalues):
    lam_max = float(np.max(eigenvalues)) if len(eigenvalues) else 0.0
    return len(eigenvalues) * max(lam_max, 0.0) * np.finfo(float).eps


def phi_filter(eigenvalues, t, tol=None):
    """phi(lam) = (1 - exp(-t*lam)) / lam, with the analytic limit t at lam ~ 0."""
    lam = np.asarray(eigenvalues, dtype=float)
    if tol is None:
        tol = rank_tolerance(lam)
    lam = np.where(lam < 0.0, 0.0, lam)
    out = np.full(lam.shape, float(t))
    big = lam > tol
    out[big] = -np.expm1(-t * lam[big]) / lam[big]
    return out


def spectral_phi(G, t, eig=None):
    """G^+ (I - exp(-t G)) for symmetric PSD ``G``, evaluated spectrally.

    Pass a precomputed :class:`SymEig` of ``G`` as ``eig`` to reuse it across
    many ``t`` values.
    """
    if t < 0 or not np.isfinite(t):
        raise ValueError(f"t must be a finite nonnegative number, got {t}")
    if eig is None:
        eig = sym_eig(G)
    lam = eig.eigenvalues
    if lam.size and lam[-1] < -1e-10 * max(abs(lam[0]), 1.0):
        raise ValueError("matrix is not positive semidefinite")
    V = eig.eigenvectors
    return (V * phi_filter(lam, t)) @ V.T
