"""``agflow`` command line: split, fit-path, ridge-path, select, baselines,
bench, bench-kernels, synth.

Exit status: 0 success, 1 validation error, 2 I/O error.
"""

import argparse
import csv
import json
import os
import sys
import time
import zipfile
from pathlib import Path

import numpy as np

from .baselines import oja_pca, power_iteration, svd_pca
from .bench import COLUMNS, compare_backends, parse_shapes, run_bench
from .dataio import (SCHEMA_VERSION, SplitSpec, SyntheticSpec, apply_centering, center,
                     generate_classes, generate_synthetic, load_csv, read_manifest, save_csv,
                     split_indices, write_manifest)
from .flow import AgFlowConfig, agflow_path, lambda_range, subspace_targets
from .paths import _jsonable, read_path, write_path
from .quasips import QuasiPsConfig
from .ridgepath import default_grid, parse_grid, ridge_pca_path
from .selection import evaluate_projection, select_model


def _seed(args_seed):
    env = os.environ.get("AGFLOW_SEED")
    if env is None or env.strip() == "":
        return args_seed
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"AGFLOW_SEED must be an integer, got {env!r}") from None


def _label_col(text):
    if text is None:
        return None
    try:
        return int(text)
    except ValueError:
        return text


def _out_dir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    if not os.access(p, os.W_OK):
        raise PermissionError(f"output directory {p} is not writable")
    return p


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([r[h] for h in header] if isinstance(r, dict) else r)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _load_split(args):
    if not Path(args.manifest).is_file():
        raise FileNotFoundError(f"split manifest not found: expected {args.manifest} (run `agflow split` first)")
    raw = load_csv(args.input, _label_col(args.label_column))
    man = read_manifest(args.manifest)
    idx = {k: np.asarray(man[k], dtype=int) for k in ("train", "val", "test")}
    for k, v in idx.items():
        if v.size and (v.min() < 0 or v.max() >= raw.n):
            raise ValueError(f"manifest {k} indices out of range for {raw.n} rows")
    if idx["train"].size < 2:
        raise ValueError("training partition needs at least two rows")
    Xtr = center(raw.values[idx["train"]])
    parts = {"train": (Xtr.values, None if raw.labels is None else raw.labels[idx["train"]])}
    for k in ("val", "test"):
        rows = apply_centering(raw.values[idx[k]], Xtr.column_means) if idx[k].size else np.zeros((0, raw.d))
        parts[k] = (rows, None if raw.labels is None else raw.labels[idx[k]])
    return raw, Xtr, parts, man


def _agflow_cfg(args):
    seed = _seed(args.seed)
    cfg = AgFlowConfig(iterations=args.iterations, step=args.step, batch=args.batch,
                       d_prime=args.d_prime, mode=args.mode, stride=args.stride, seed=seed)
    qps = QuasiPsConfig(step=args.qps_step, epoch_length=args.epoch_length,
                        iterations=args.qps_iterations, seed=seed)
    return cfg, qps


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args):
    d = args.d
    spikes = [float(v) for v in args.spikes.split(",")] if args.spikes else []
    spectrum = (spikes + [args.tail] * d)[:d]
    spec = SyntheticSpec(args.n, d, tuple(spectrum), seed=_seed(args.seed))
    if args.classes > 0:
        raw = generate_classes(spec, args.classes, args.separation, args.direction)
    else:
        raw = generate_synthetic(spec)
    save_csv(args.out, raw)
    print(f"wrote {raw.n} x {raw.d} to {args.out}")
    return 0


def cmd_split(args):
    raw = load_csv(args.input, _label_col(args.label_column))
    ratios = tuple(float(v) for v in args.ratios.split(","))
    spec = SplitSpec(ratios, _seed(args.seed), not args.no_stratify)
    tr, va, te = split_indices(raw.n, raw.labels, spec)
    write_manifest(args.out, spec.seed, tr, va, te)
    print(f"train={tr.size} val={va.size} test={te.size}")
    if raw.labels is not None:
        for c in np.unique(raw.labels):
            counts = [int(np.sum(raw.labels[p] == c)) for p in (tr, va, te)]
            print(f"  class {c}: {counts[0]}/{counts[1]}/{counts[2]}")
    return 0


def _path_meta(pp, extra):
    meta = dict(pp.meta)
    meta.update(extra)
    meta["schema_version"] = SCHEMA_VERSION
    meta["entries"] = len(pp)
    return meta


def cmd_fit_path(args):
    raw, Xtr, parts, man = _load_split(args)
    cfg, qps = _agflow_cfg(args)
    out = _out_dir(args.out_dir)
    t0 = time.perf_counter()
    pp = agflow_path(Xtr, cfg, qps, subspace=args.subspace)
    wall = time.perf_counter() - t0
    ext = "csv" if args.format == "csv" else "npz"
    write_path(out / f"agflow_path.{ext}", pp, args.format)
    lo, hi = lambda_range(cfg)
    _write_json(out / "agflow_path.meta.json", _path_meta(pp, {
        "manifest": str(args.manifest), "input": str(args.input), "wall_seconds": wall,
        "lambda_range": [lo, hi], "quasips": {"step": qps.step, "epoch_length": qps.epoch_length,
                                              "iterations": qps.iterations, "seed": qps.seed}}))
    print(f"{len(pp)} path entries, lambda-equivalent range [{lo:.6g}, {hi:.6g}], {wall:.2f}s")
    return 0


def cmd_ridge_path(args):
    raw, Xtr, parts, man = _load_split(args)
    grid = parse_grid(args.grid) if args.grid else default_grid()
    seed = _seed(args.seed)
    out = _out_dir(args.out_dir)
    t0 = time.perf_counter()
    pp = ridge_pca_path(Xtr, args.d_prime, grid, args.subspace, QuasiPsConfig(seed=seed))
    wall = time.perf_counter() - t0
    ext = "csv" if args.format == "csv" else "npz"
    write_path(out / f"ridge_path.{ext}", pp, args.format)
    _write_json(out / "ridge_path.meta.json", _path_meta(pp, {
        "manifest": str(args.manifest), "input": str(args.input), "wall_seconds": wall, "seed": seed}))
    if pp.meta["degenerate"]:
        print(f"warning: {len(pp.meta['degenerate'])} degenerate (component, lambda) entries", file=sys.stderr)
    print(f"{len(pp)} ridge path entries, {wall:.2f}s")
    return 0


def cmd_select(args):
    if not Path(args.path).is_file():
        raise FileNotFoundError(f"path file not found: {args.path}")
    raw, Xtr, parts, man = _load_split(args)
    if raw.labels is None:
        raise ValueError("model selection needs a label column")
    pp = read_path(args.path)
    if pp.d != raw.d:
        raise ValueError(f"path has d={pp.d} but the data have {raw.d} features")
    params = {"k_neighbors": args.k_neighbors} if args.learner == "knn" else {}
    res = select_model(pp, parts["train"], parts["val"], args.learner, params, threads=args.threads)
    if args.score_test:
        if parts["test"][0].shape[0] == 0:
            raise ValueError("test partition is empty")
        res.test_score = evaluate_projection(res.best_projection, parts["train"], parts["test"],
                                             args.learner, params)
    out = _out_dir(args.out_dir)
    stem = args.prefix or pp.source
    doc = res.to_json()
    doc["path_source"] = pp.source
    _write_json(out / f"{stem}_selection.json", doc)
    _write_csv(out / f"{stem}_scores.csv", ["k", "lambda", "score"],
               [[k, _fmt(lam), "" if s is None else _fmt(s)] for k, lam, s in res.scores])
    np.savetxt(out / f"{stem}_best_projection.csv", res.best_projection, delimiter=",", fmt="%.17g",
               header=f"schema_version: {SCHEMA_VERSION}; k={res.best_k}; lambda={res.best_lambda!r}")
    msg = f"best k={res.best_k} lambda={res.best_lambda:.6g} val {res.evaluator_tag}={res.best_score:.4f}"
    if res.test_score is not None:
        msg += f" test={res.test_score:.4f}"
    print(msg)
    return 0


def cmd_baselines(args):
    raw, Xtr, parts, man = _load_split(args)
    if raw.labels is None:
        raise ValueError("baselines need a label column")
    seed = _seed(args.seed)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    out = _out_dir(args.out_dir)
    params = {"k_neighbors": args.k_neighbors} if args.learner == "knn" else {}
    rows = []
    for m in methods:
        if m == "svd":
            W = svd_pca(Xtr, args.d_prime).matrix
        elif m == "power":
            W = power_iteration(Xtr, args.d_prime, args.power_iters, seed).matrix
        elif m == "oja":
            W = oja_pca(Xtr, args.d_prime, args.oja_epochs, None, seed).matrix
        elif m == "quasips":
            tg = subspace_targets(Xtr, args.d_prime, "quasips", QuasiPsConfig(seed=seed))
            W = np.column_stack([t.direction for t in tg])
        else:
            raise ValueError(f"unknown baseline method {m!r}")
        np.savetxt(out / f"loadings_{m}.csv", W, delimiter=",", fmt="%.17g",
                   header=f"schema_version: {SCHEMA_VERSION}; method={m}")
        val = evaluate_projection(W, parts["train"], parts["val"], args.learner, params)
        test = (evaluate_projection(W, parts["train"], parts["test"], args.learner, params)
                if parts["test"][0].shape[0] else "")
        rows.append({"method": m, "d_prime": args.d_prime, "learner": args.learner,
                     "val_accuracy": _fmt(val), "test_accuracy": _fmt(test)})
        print(f"{m:8s} val={val:.4f}" + (f" test={test:.4f}" if test != "" else ""))
    _write_csv(out / "baselines.csv", ["method", "d_prime", "learner", "val_accuracy", "test_accuracy"], rows)
    return 0


def cmd_bench(args):
    shapes = parse_shapes(args.shapes)
    methods = tuple(m.strip() for m in args.methods.split(","))
    rows = run_bench(shapes, args.iterations, args.grid_size, args.mode, methods, _seed(args.seed))
    _write_csv(args.out, list(COLUMNS), [{k: _fmt(v) for k, v in r.items()} for r in rows])
    for r in rows:
        print(f"{r['n']}x{r['d']}x{r['d_prime']} {r['method']:7s} {r['models']:6d} models "
              f"{r['seconds']:.3f}s  {r['seconds_per_model']:.3e}s/model")
    return 0


def cmd_bench_kernels(args):
    rows = compare_backends(args.n, args.d, args.iterations)
    header = ["kernel", "numba_seconds", "numpy_seconds", "speedup", "max_abs_diff"]
    if args.out:
        _write_csv(args.out, header, [{k: _fmt(v) for k, v in r.items()} for r in rows])
    for r in rows:
        print(f"{r['kernel']:13s} numba {r['numba_seconds']:.4f}s  numpy {r['numpy_seconds']:.4f}s  "
              f"x{r['speedup']:.1f}  diff {r['max_abs_diff']:.1e}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _data_args(p, need_manifest=True):
    p.add_argument("--input", required=True, help="CSV file, rows are samples")
    p.add_argument("--label-column", default=None, help="label column name or index")
    if need_manifest:
        p.add_argument("--manifest", required=True, help="split manifest JSON from `agflow split`")


def _common(p):
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    ap = argparse.ArgumentParser(prog="agflow", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic (optionally labelled) CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--spikes", default="8,6,4,3", help="leading covariance eigenvalues")
    p.add_argument("--tail", type=float, default=1.0, help="remaining eigenvalues")
    p.add_argument("--classes", type=int, default=2, help="0 for unlabelled data")
    p.add_argument("--separation", type=float, default=6.0)
    p.add_argument("--direction", type=int, default=4, help="eigenvector index of the class shift")
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="stratified train/val/test split manifest")
    _data_args(p, need_manifest=False)
    p.add_argument("--ratios", default="0.6,0.2,0.2")
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("fit-path", help="AgFlow projection path on the training partition")
    _data_args(p)
    d = AgFlowConfig()
    p.add_argument("--iterations", type=int, default=d.iterations)
    p.add_argument("--step", type=float, default=d.step)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--d-prime", type=int, default=d.d_prime)
    p.add_argument("--mode", choices=("sgd", "gd"), default=d.mode)
    p.add_argument("--stride", type=int, default=d.stride)
    p.add_argument("--subspace", choices=("quasips", "exact_svd"), default="quasips")
    p.add_argument("--qps-step", type=float, default=None)
    p.add_argument("--epoch-length", type=int, default=None)
    p.add_argument("--qps-iterations", type=int, default=QuasiPsConfig().iterations)
    p.add_argument("--format", choices=("npz", "csv"), default="npz")
    p.add_argument("--out-dir", required=True)
    _common(p)
    p.set_defaults(func=cmd_fit_path)

    p = sub.add_parser("ridge-path", help="closed-form ridge projection path over a lambda grid")
    _data_args(p)
    p.add_argument("--grid", default=None, help="lo:hi:num (default 1e-4:1e4:100)")
    p.add_argument("--d-prime", type=int, default=AgFlowConfig().d_prime)
    p.add_argument("--subspace", choices=("exact_svd", "quasips"), default="exact_svd")
    p.add_argument("--format", choices=("npz", "csv"), default="npz")
    p.add_argument("--out-dir", required=True)
    _common(p)
    p.set_defaults(func=cmd_ridge_path)

    p = sub.add_parser("select", help="pick the best path entry by validation accuracy")
    _data_args(p)
    p.add_argument("--path", required=True, help="path file from fit-path or ridge-path")
    p.add_argument("--learner", choices=("centroid", "knn"), default="centroid")
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--score-test", action="store_true")
    p.add_argument("--prefix", default=None, help="output file prefix (default: path source)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="parallel scoring workers")
    p.add_argument("--out-dir", required=True)
    _common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("baselines", help="unpenalised PCA baselines with validation/test accuracy")
    _data_args(p)
    p.add_argument("--methods", default="svd,power,oja,quasips")
    p.add_argument("--d-prime", type=int, default=AgFlowConfig().d_prime)
    p.add_argument("--learner", choices=("centroid", "knn"), default="centroid")
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--power-iters", type=int, default=200)
    p.add_argument("--oja-epochs", type=int, default=20)
    p.add_argument("--out-dir", required=True)
    _common(p)
    p.set_defaults(func=cmd_baselines)

    p = sub.add_parser("bench", help="time AgFlow against the ridge path on synthetic shapes")
    p.add_argument("--shapes", default="62x2000x6", help="comma list of NxDxDPRIME")
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--grid-size", type=int, default=20)
    p.add_argument("--mode", choices=("sgd", "gd"), default="sgd")
    p.add_argument("--methods", default="agflow,ridge")
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bench-kernels", help="numba kernels vs numpy fallbacks")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=500)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench_kernels)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, zipfile.BadZipFile, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
