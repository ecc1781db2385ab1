"""Projection paths shared by the ridge and AgFlow estimators, plus their
on-disk formats (``.npz`` or ``.csv``)."""

import csv
import io
import json
import zipfile
from dataclasses import dataclass, field

import numpy as np

from .dataio import SCHEMA_VERSION, check_schema


@dataclass
class ProjectionPath:
    """A sequence of d x d' projection matrices indexed by ``steps``.

    For AgFlow paths ``steps`` are iteration counts k; for ridge paths they
    are 1-based grid positions ordered from strongest to weakest penalty.
    ``valid[e, j]`` is False where column j of entry e is undefined.
    """

    steps: np.ndarray
    lambdas: np.ndarray
    matrices: np.ndarray
    valid: np.ndarray | None = None
    source: str = "agflow"
    meta: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=np.int64)
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.matrices = np.asarray(self.matrices, dtype=float)
        if self.matrices.ndim != 3:
            raise ValueError("matrices must have shape (entries, d, d')")
        E = self.matrices.shape[0]
        if self.steps.shape != (E,) or self.lambdas.shape != (E,):
            raise ValueError("steps/lambdas must have one value per path entry")
        if self.valid is None:
            self.valid = np.ones((E, self.matrices.shape[2]), dtype=bool)
        self.valid = np.asarray(self.valid, dtype=bool)

    def __len__(self):
        return self.matrices.shape[0]

    @property
    def d(self):
        return self.matrices.shape[1]

    @property
    def d_prime(self):
        return self.matrices.shape[2]

    def entry_valid(self):
        return self.valid.all(axis=1)

    def __iter__(self):
        for e in range(len(self)):
            yield int(self.steps[e]), float(self.lambdas[e]), self.matrices[e]

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return ProjectionPath(self.steps[idx], self.lambdas[idx], self.matrices[idx],
                              self.valid[idx], self.source, dict(self.meta))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_path(path, pp, fmt=None):
    fmt = fmt or ("csv" if str(path).endswith(".csv") else "npz")
    meta = _jsonable(dict(pp.meta, source=pp.source, schema_version=SCHEMA_VERSION))
    if fmt == "npz":
        arrays = {"steps": pp.steps, "lambdas": pp.lambdas, "matrices": pp.matrices,
                  "valid": pp.valid, "meta": np.array(json.dumps(meta, sort_keys=True))}
        # fixed zip timestamps keep reruns byte-identical
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
            for name, arr in arrays.items():
                buf = io.BytesIO()
                np.lib.format.write_array(buf, np.asarray(arr), allow_pickle=False)
                info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                zf.writestr(info, buf.getvalue())
        return
    if fmt != "csv":
        raise ValueError(f"unknown path format {fmt!r}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        fh.write(f"# meta: {json.dumps(meta, sort_keys=True)}\n")
        w = csv.writer(fh)
        w.writerow(["k", "lambda", "j"] + [f"w{i}" for i in range(pp.d)])
        for e in range(len(pp)):
            for j in range(pp.d_prime):
                col = pp.matrices[e, :, j] if pp.valid[e, j] else np.full(pp.d, np.nan)
                w.writerow([int(pp.steps[e]), repr(float(pp.lambdas[e])), j + 1]
                           + [repr(float(v)) for v in col])


def read_path(path):
    if str(path).endswith(".csv"):
        return _read_path_csv(path)
    if not zipfile.is_zipfile(path):
        raise ValueError(f"{path}: not an .npz path file")
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        check_schema(meta.get("schema_version"), path)
        source = meta.pop("source", "agflow")
        meta.pop("schema_version", None)
        return ProjectionPath(z["steps"], z["lambdas"], z["matrices"], z["valid"], source, meta)


def _read_path_csv(path):
    meta, version = {}, None
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# schema_version:"):
                version = line.split(":", 1)[1].strip()
            elif line.startswith("# meta:"):
                meta = json.loads(line.split(":", 1)[1])
            elif not line.startswith("#"):
                rows.append(line)
    check_schema(version, path)
    reader = csv.reader(rows)
    header = next(reader)
    d = len(header) - 3
    by_step = {}
    for r in reader:
        k, lam, j = int(r[0]), float(r[1]), int(r[2])
        by_step.setdefault(k, [lam, {}])[1][j] = np.array([float(v) for v in r[3:]])
    steps = sorted(by_step)
    d_prime = max(max(v[1]) for v in by_step.values())
    mats = np.zeros((len(steps), d, d_prime))
    valid = np.zeros((len(steps), d_prime), dtype=bool)
    for e, k in enumerate(steps):
        for j, col in by_step[k][1].items():
            ok = bool(np.all(np.isfinite(col)))
            valid[e, j - 1] = ok
            mats[e, :, j - 1] = col if ok else 0.0
    source = meta.pop("source", "agflow")
    meta.pop("schema_version", None)
    return ProjectionPath(steps, [by_step[k][0] for k in steps], mats, valid, source, meta)
