"""Hot inner loops: variance-reduced power steps, Oja passes and the
per-iteration least-squares paths.

Every kernel exists twice: ``_<name>_nb`` (numba, explicit loops) and
``_<name>_np`` (vectorised numpy, Python loop over iterations only). The
public name points at one of them according to ``agflow._jit.USE_NUMBA``.
Randomness never enters a kernel: index streams are drawn by the caller so
both backends consume identical inputs.
"""

import numpy as np

from ._jit import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# variance-reduced PCA epochs


@njit
def _vr_pca_nb(X, w0, step, idx, restarts):
    n, d = X.shape
    L, M = idx.shape
    R = restarts.shape[0]
    hist = np.empty((L, d))
    wt = w0.copy()
    w = np.empty(d)
    u = np.empty(d)
    anchor = np.empty(n)
    n_restart = 0
    for l in range(L):
        for i in range(n):
            acc = 0.0
            for c in range(d):
                acc += X[i, c] * wt[c]
            anchor[i] = acc
        for c in range(d):
            u[c] = 0.0
        for i in range(n):
            a = anchor[i] / n
            for c in range(d):
                u[c] += X[i, c] * a
        for c in range(d):
            w[c] = wt[c]
        for s in range(M):
            i = idx[l, s]
            p = 0.0
            for c in range(d):
                p += X[i, c] * w[c]
            coef = p - anchor[i]
            sq = 0.0
            for c in range(d):
                v = w[c] + step * (coef * X[i, c] + u[c])
                w[c] = v
                sq += v * v
            nrm = np.sqrt(sq)
            if nrm > 0.0 and np.isfinite(nrm):
                for c in range(d):
                    w[c] /= nrm
            else:
                for c in range(d):
                    w[c] = restarts[n_restart % R, c]
                n_restart += 1
        for c in range(d):
            wt[c] = w[c]
            hist[l, c] = w[c]
    return hist


def _vr_pca_np(X, w0, step, idx, restarts):
    n, d = X.shape
    L, M = idx.shape
    hist = np.empty((L, d))
    wt = w0.copy()
    n_restart = 0
    for l in range(L):
        anchor = X @ wt
        u = (X.T @ anchor) / n
        rows = X[idx[l]]
        ref = anchor[idx[l]]
        w = wt.copy()
        for s in range(M):
            x = rows[s]
            w = w + step * ((x @ w - ref[s]) * x + u)
            nrm = np.sqrt(w @ w)
            if nrm > 0.0 and np.isfinite(nrm):
                w /= nrm
            else:
                w = restarts[n_restart % len(restarts)].copy()
                n_restart += 1
        wt = w
        hist[l] = wt
    return hist


# ---------------------------------------------------------------------------
# Oja's rule


@njit
def _oja_nb(X, w0, step, order):
    d = X.shape[1]
    w = w0.copy()
    for t in range(order.shape[0]):
        i = order[t]
        p = 0.0
        for c in range(d):
            p += X[i, c] * w[c]
        sq = 0.0
        for c in range(d):
            v = w[c] + step * X[i, c] * p
            w[c] = v
            sq += v * v
        nrm = np.sqrt(sq)
        if nrm > 0.0:
            for c in range(d):
                w[c] /= nrm
    return w


def _oja_np(X, w0, step, order):
    w = w0.copy()
    for i in order:
        x = X[i]
        w = w + step * x * (x @ w)
        nrm = np.sqrt(w @ w)
        if nrm > 0.0:
            w /= nrm
    return w


# ---------------------------------------------------------------------------
# least-squares paths from zero initialisation


@njit
def _sgd_path_nb(X, y, eta, batches, stride):
    d = X.shape[1]
    K, m = batches.shape
    n_rec = K // stride
    out = np.zeros((n_rec, d))
    norms = np.empty(n_rec)
    beta = np.zeros(d)
    grad = np.empty(d)
    scale = eta / m
    e = 0
    for k in range(1, K + 1):
        for c in range(d):
            grad[c] = 0.0
        for b in range(m):
            i = batches[k - 1, b]
            r = y[i]
            for c in range(d):
                r -= X[i, c] * beta[c]
            for c in range(d):
                grad[c] += r * X[i, c]
        sq = 0.0
        for c in range(d):
            beta[c] += scale * grad[c]
            sq += beta[c] * beta[c]
        if k % stride == 0:
            nrm = np.sqrt(sq)
            norms[e] = nrm
            if nrm > 0.0:
                for c in range(d):
                    out[e, c] = beta[c] / nrm
            e += 1
    return out, norms


def _sgd_path_np(X, y, eta, batches, stride):
    d = X.shape[1]
    K, m = batches.shape
    n_rec = K // stride
    out = np.zeros((n_rec, d))
    norms = np.empty(n_rec)
    beta = np.zeros(d)
    scale = eta / m
    e = 0
    for k in range(1, K + 1):
        Xb = X[batches[k - 1]]
        beta += scale * ((y[batches[k - 1]] - Xb @ beta) @ Xb)
        if k % stride == 0:
            nrm = np.sqrt(beta @ beta)
            norms[e] = nrm
            if nrm > 0.0:
                out[e] = beta / nrm
            e += 1
    return out, norms


@njit
def _gd_path_gram_nb(G, g, eta, n, K, stride):
    d = G.shape[0]
    n_rec = K // stride
    out = np.zeros((n_rec, d))
    norms = np.empty(n_rec)
    beta = np.zeros(d)
    scale = eta / n
    e = 0
    for k in range(1, K + 1):
        Gb = np.dot(G, beta)
        sq = 0.0
        for c in range(d):
            beta[c] += scale * (g[c] - Gb[c])
            sq += beta[c] * beta[c]
        if k % stride == 0:
            nrm = np.sqrt(sq)
            norms[e] = nrm
            if nrm > 0.0:
                for c in range(d):
                    out[e, c] = beta[c] / nrm
            e += 1
    return out, norms


def _gd_path_gram_np(G, g, eta, n, K, stride):
    d = G.shape[0]
    n_rec = K // stride
    out = np.zeros((n_rec, d))
    norms = np.empty(n_rec)
    beta = np.zeros(d)
    scale = eta / n
    e = 0
    for k in range(1, K + 1):
        beta += scale * (g - G @ beta)
        if k % stride == 0:
            nrm = np.sqrt(beta @ beta)
            norms[e] = nrm
            if nrm > 0.0:
                out[e] = beta / nrm
            e += 1
    return out, norms


@njit
def _gd_path_data_nb(X, y, eta, K, stride):
    n, d = X.shape
    n_rec = K // stride
    out = np.zeros((n_rec, d))
    norms = np.empty(n_rec)
    beta = np.zeros(d)
    scale = eta / n
    e = 0
    for k in range(1, K + 1):
        r = y - np.dot(X, beta)
        grad = np.dot(r, X)
        sq = 0.0
        for c in range(d):
            beta[c] += scale * grad[c]
            sq += beta[c] * beta[c]
        if k % stride == 0:
            nrm = np.sqrt(sq)
            norms[e] = nrm
            if nrm > 0.0:
                for c in range(d):
                    out[e, c] = beta[c] / nrm
            e += 1
    return out, norms


def _gd_path_data_np(X, y, eta, K, stride):
    d = X.shape[1]
    n = X.shape[0]
    n_rec = K // stride
    out = np.zeros((n_rec, d))
    norms = np.empty(n_rec)
    beta = np.zeros(d)
    scale = eta / n
    e = 0
    for k in range(1, K + 1):
        beta += scale * ((y - X @ beta) @ X)
        if k % stride == 0:
            nrm = np.sqrt(beta @ beta)
            norms[e] = nrm
            if nrm > 0.0:
                out[e] = beta / nrm
            e += 1
    return out, norms


NUMBA_KERNELS = {
    "vr_pca": _vr_pca_nb,
    "oja": _oja_nb,
    "sgd_path": _sgd_path_nb,
    "gd_path_gram": _gd_path_gram_nb,
    "gd_path_data": _gd_path_data_nb,
}
NUMPY_KERNELS = {
    "vr_pca": _vr_pca_np,
    "oja": _oja_np,
    "sgd_path": _sgd_path_np,
    "gd_path_gram": _gd_path_gram_np,
    "gd_path_data": _gd_path_data_np,
}

_active = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

vr_pca = _active["vr_pca"]
oja = _active["oja"]
sgd_path = _active["sgd_path"]
gd_path_gram = _active["gd_path_gram"]
gd_path_data = _active["gd_path_data"]
