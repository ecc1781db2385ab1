"""Wall-clock comparisons: AgFlow vs the ridge path per model, cost scaling
in d, and the numba kernels against their numpy fallbacks."""

import time

import numpy as np

from . import kernels
from .dataio import SyntheticSpec, center, generate_synthetic
from .flow import AgFlowConfig, agflow_path
from .quasips import QuasiPsConfig
from .ridgepath import default_grid, gram_eig, ridge_pca_path

COLUMNS = ("n", "d", "d_prime", "method", "models", "seconds", "seconds_per_model")


def parse_shapes(text):
    """``"62x2000x6,72x7129x6"`` -> [(62, 2000, 6), (72, 7129, 6)]."""
    shapes = []
    for part in text.split(","):
        try:
            n, d, dp = (int(v) for v in part.lower().split("x"))
        except ValueError:
            raise ValueError(f"shape must look like NxDxDPRIME, got {part!r}") from None
        if min(n, d, dp) < 1 or dp > min(n, d):
            raise ValueError(f"invalid shape {part!r}")
        shapes.append((n, d, dp))
    if not shapes:
        raise ValueError("no shapes given")
    return shapes


def bench_data(n, d, seed=0):
    spectrum = np.concatenate([np.linspace(10.0, 2.0, min(d, 10)), np.ones(max(d - 10, 0))])
    return center(generate_synthetic(SyntheticSpec(n, d, tuple(spectrum), seed=seed)))


def warmup():
    """Trigger kernel compilation so it is not billed to the first timing."""
    X = bench_data(8, 4)
    agflow_path(X, AgFlowConfig(iterations=2, d_prime=1, mode="sgd"), QuasiPsConfig(iterations=1))
    agflow_path(X, AgFlowConfig(iterations=2, d_prime=1, mode="gd"), QuasiPsConfig(iterations=1))
    agflow_path(X.values[:, :2].T.copy(), AgFlowConfig(iterations=2, d_prime=1, mode="gd"),
                QuasiPsConfig(iterations=1))


def time_agflow(X, d_prime, iterations=1000, mode="sgd", seed=0, qps=None):
    cfg = AgFlowConfig(iterations=iterations, d_prime=d_prime, mode=mode, seed=seed)
    t0 = time.perf_counter()
    agflow_path(X, cfg, qps or QuasiPsConfig(seed=seed))
    return time.perf_counter() - t0


def time_ridge(X, d_prime, grid_size=20):
    grid = default_grid(num=grid_size)
    t0 = time.perf_counter()
    ridge_pca_path(X, d_prime, grid, "exact_svd")
    return time.perf_counter() - t0


def run_bench(shapes, iterations=1000, grid_size=20, mode="sgd", methods=("agflow", "ridge"), seed=0):
    warmup()
    rows = []
    for n, d, dp in shapes:
        X = bench_data(n, d, seed)
        for method in methods:
            if method == "agflow":
                secs, models = time_agflow(X, dp, iterations, mode, seed), iterations
            elif method == "ridge":
                secs, models = time_ridge(X, dp, grid_size), grid_size
            else:
                raise ValueError(f"unknown bench method {method!r}")
            rows.append({"n": n, "d": d, "d_prime": dp, "method": method, "models": models,
                         "seconds": secs, "seconds_per_model": secs / models})
    return rows


def cost_scaling(n, d, iterations=200, repeats=3, seed=0):
    """Ridge one-time setup (eigendecomposition of X^T X) and AgFlow gd
    per-step time at widths d and 2d; returns both growth ratios."""
    warmup()
    out = {}
    for width in (d, 2 * d):
        X = bench_data(n, width, seed)
        y = X.values @ np.ones(width) / np.sqrt(width)
        setup = min(_timed(lambda: gram_eig(X)) for _ in range(repeats))
        cfg = AgFlowConfig(iterations=iterations, d_prime=1, mode="gd")
        A = np.ascontiguousarray(X.values)
        if width <= n:
            step = min(_timed(lambda: kernels.gd_path_gram(A.T @ A, A.T @ y, cfg.step, float(n),
                                                           iterations, iterations)) for _ in range(repeats))
        else:
            step = min(_timed(lambda: kernels.gd_path_data(A, y, cfg.step, iterations, iterations))
                       for _ in range(repeats))
        out[width] = (setup, step / iterations)
    (s1, p1), (s2, p2) = out[d], out[2 * d]
    return {"ridge_setup_ratio": s2 / s1, "agflow_step_ratio": p2 / p1,
            "ridge_setup_seconds": [s1, s2], "agflow_step_seconds": [p1, p2]}


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def compare_backends(n=200, d=500, iterations=500, seed=0, repeats=3):
    """Time every kernel through numba and through the numpy fallback on
    identical inputs; returns rows with the max abs difference between them."""
    rng = np.random.default_rng(seed)
    X = np.ascontiguousarray(bench_data(n, d, seed).values)
    y = X @ rng.standard_normal(d)
    w0 = rng.standard_normal(d)
    w0 /= np.linalg.norm(w0)
    step = 1.0 / (np.mean(np.sum(X * X, 1)) * n)
    idx = rng.integers(0, n, size=(10, n))
    spare = np.tile(w0, (2, 1))
    batches = np.argsort(rng.random((iterations, n)), axis=1)[:, :min(100, n // 2)]
    G, g = X.T @ X, X.T @ y
    cases = {
        "vr_pca": (X, w0, step, idx, spare),
        "oja": (X, w0, step, np.tile(np.arange(n), 5)),
        "sgd_path": (X, y, 1e-4, batches, 1),
        "gd_path_gram": (G, g, 1e-4, float(n), iterations, 1),
        "gd_path_data": (X, y, 1e-4, iterations, 1),
    }
    rows = []
    for name, args in cases.items():
        nb, py = kernels.NUMBA_KERNELS[name], kernels.NUMPY_KERNELS[name]
        nb(*args)  # compile
        t_nb = min(_timed(lambda: nb(*args)) for _ in range(repeats))
        t_np = min(_timed(lambda: py(*args)) for _ in range(repeats))
        a, b = nb(*args), py(*args)
        a = a[0] if isinstance(a, tuple) else a
        b = b[0] if isinstance(b, tuple) else b
        rows.append({"kernel": name, "numba_seconds": t_nb, "numpy_seconds": t_np,
                     "speedup": t_np / t_nb, "max_abs_diff": float(np.max(np.abs(a - b)))})
    return rows
