"""Dataset ingestion, centering, train/val/test splitting and synthetic data."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1.0"


@dataclass
class RawDataset:
    values: np.ndarray
    labels: np.ndarray | None = None
    feature_names: list | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        n, d = self.values.shape
        if n < 2 or d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values contain non-finite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if self.labels.shape != (n,):
                raise ValueError(f"labels must have length {n}, got shape {self.labels.shape}")
        if self.feature_names is not None and len(self.feature_names) != d:
            raise ValueError(f"expected {d} feature names, got {len(self.feature_names)}")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        labels = None if self.labels is None else self.labels[idx]
        return RawDataset(self.values[idx], labels, self.feature_names, dict(self.meta))


@dataclass
class DataMatrix:
    values: np.ndarray
    column_means: np.ndarray

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple = (0.6, 0.2, 0.2)
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        r = tuple(float(x) for x in self.ratios)
        if len(r) != 3:
            raise ValueError(f"need three split ratios, got {len(r)}")
        if any(not (0.0 <= x <= 1.0) for x in r):
            raise ValueError(f"split ratios must lie in [0, 1], got {r}")
        if abs(sum(r) - 1.0) > 1e-12:
            raise ValueError(f"split ratios must sum to 1, got {sum(r)!r}")
        object.__setattr__(self, "ratios", r)


@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    d: int
    spectrum: tuple
    true_beta: tuple | None = None
    noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        s = np.asarray(self.spectrum, dtype=float)
        if s.shape != (self.d,):
            raise ValueError(f"spectrum must have length d={self.d}")
        if np.any(s < 0) or np.any(np.diff(s) > 0):
            raise ValueError("spectrum must be nonnegative and nonincreasing")
        if self.true_beta is not None and len(self.true_beta) != self.d:
            raise ValueError(f"true_beta must have length d={self.d}")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")


# ---------------------------------------------------------------------------
# CSV


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _resolve_label_column(label_column, header, width):
    if label_column is None:
        return None
    if isinstance(label_column, str):
        key = label_column.strip()
        if key.lower() == "last":
            return width - 1
        if key.lower() == "first":
            return 0
        if header is not None and key in header:
            return header.index(key)
        try:
            label_column = int(key)
        except ValueError:
            raise ValueError(f"label column {key!r} not found in header") from None
    idx = int(label_column)
    if idx < 0:
        idx += width
    if not 0 <= idx < width:
        raise ValueError(f"label column index {label_column} out of range for {width} columns")
    return idx


def load_csv(path, label_column=None):
    """Read a comma-separated file with samples as rows.

    A header is assumed when any cell of the first row outside the label
    column fails to parse as a number. ``label_column`` may be a header name,
    an integer index (negative counts from the end), or ``"last"``/``"first"``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    width = len(rows[0])
    first = [c.strip() for c in rows[0]]

    named = isinstance(label_column, str) and not _is_int(label_column) \
        and label_column.strip().lower() not in ("last", "first")
    if named:
        header = first
        lab = _resolve_label_column(label_column, header, width)
    else:
        lab = _resolve_label_column(label_column, None, width)
        probe = [c for i, c in enumerate(first) if i != lab]
        header = None if all(_is_float(c) for c in probe) else first
    if header is not None:
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    values, labels = [], []
    for r_i, row in enumerate(rows):
        line = r_i + (2 if header is not None else 1)
        if len(row) != width:
            raise ValueError(f"{path}: row {line} has {len(row)} fields, expected {width}")
        vals = []
        for c_i, cell in enumerate(row):
            if c_i == lab:
                labels.append(cell.strip())
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}: row {line}, column {c_i + 1}: non-numeric cell {cell!r}") from None
            if not np.isfinite(v):
                raise ValueError(f"{path}: row {line}, column {c_i + 1}: non-finite value")
            vals.append(v)
        values.append(vals)

    names = None
    if header is not None:
        names = [h for i, h in enumerate(header) if i != lab]
    return RawDataset(
        np.array(values, dtype=float),
        None if lab is None else np.array(labels),
        names,
    )


def _is_int(s):
    try:
        int(s)
    except (TypeError, ValueError):
        return False
    return True


def save_csv(path, raw, label_name="label"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        names = raw.feature_names or [f"x{i}" for i in range(raw.d)]
        w.writerow(list(names) + ([label_name] if raw.labels is not None else []))
        for i in range(raw.n):
            row = [repr(float(v)) for v in raw.values[i]]
            if raw.labels is not None:
                row.append(str(raw.labels[i]))
            w.writerow(row)


# ---------------------------------------------------------------------------
# centering


def center(raw):
    values = raw.values if isinstance(raw, RawDataset) else np.asarray(raw, dtype=float)
    if values.shape[0] < 2:
        raise ValueError("centering needs at least two samples")
    means = values.mean(axis=0)
    return DataMatrix(values - means, means)


def apply_centering(rows, means):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    means = np.asarray(means, dtype=float)
    if rows.shape[1] != means.shape[0]:
        raise ValueError(f"width {rows.shape[1]} does not match {means.shape[0]} column means")
    return rows - means


# ---------------------------------------------------------------------------
# splitting


def largest_remainder(total, ratios):
    """Integer allocation of ``total`` proportional to ``ratios``; leftover
    units go to the largest fractional parts, earlier parts first on ties."""
    quotas = np.asarray(ratios, dtype=float) * total
    counts = np.floor(quotas + 1e-9).astype(int)
    left = total - counts.sum()
    frac = quotas - counts
    for i in sorted(range(len(frac)), key=lambda i: (-round(frac[i], 9), i))[:left]:
        counts[i] += 1
    return counts


def split_indices(n, labels, spec):
    rng = np.random.default_rng(spec.seed)
    parts = ([], [], [])
    if spec.stratified:
        if labels is None:
            raise ValueError("stratified split requested but the dataset has no labels")
        labels = np.asarray(labels)
        groups = [np.flatnonzero(labels == c) for c in np.unique(labels)]
    else:
        groups = [np.arange(n)]
    for idx in groups:
        idx = rng.permutation(idx)
        counts = largest_remainder(len(idx), spec.ratios)
        edges = np.concatenate([[0], np.cumsum(counts)])
        for p in range(3):
            parts[p].extend(idx[edges[p]:edges[p + 1]].tolist())
    return tuple(np.array(sorted(p), dtype=int) for p in parts)


def split(raw, spec):
    tr, va, te = split_indices(raw.n, raw.labels, spec)
    return raw.subset(tr), raw.subset(va), raw.subset(te)


def write_manifest(path, seed, train, val, test):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": int(seed),
        "train": [int(i) for i in train],
        "val": [int(i) for i in val],
        "test": [int(i) for i in test],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def check_schema(version, what):
    major = str(version).split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise ValueError(f"{what}: unsupported schema version {version!r} (expected {SCHEMA_VERSION})")


def read_manifest(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    check_schema(doc.get("schema_version", SCHEMA_VERSION), path)
    for key in ("seed", "train", "val", "test"):
        if key not in doc:
            raise ValueError(f"{path}: manifest is missing {key!r}")
    return doc


# ---------------------------------------------------------------------------
# synthetic data


def random_orthogonal(d, rng):
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))


def generate_synthetic(spec):
    """Gaussian rows with covariance Q diag(spectrum) Q^T for a seeded random
    orthogonal Q. ``meta`` carries ``eigenvectors`` (Q), ``spectrum`` and,
    for regression specs, ``true_beta``."""
    rng = np.random.default_rng(spec.seed)
    Q = random_orthogonal(spec.d, rng)
    s = np.asarray(spec.spectrum, dtype=float)
    Z = rng.standard_normal((spec.n, spec.d))
    X = (Z * np.sqrt(s)) @ Q.T
    meta = {"eigenvectors": Q, "spectrum": s}
    labels = None
    if spec.true_beta is not None:
        beta = np.asarray(spec.true_beta, dtype=float)
        labels = X @ beta
        if spec.noise_sd > 0:
            labels = labels + spec.noise_sd * rng.standard_normal(spec.n)
        meta["true_beta"] = beta
    return RawDataset(X, labels, None, meta)


def generate_classes(spec, n_classes=2, separation=2.0, direction=None):
    """Labelled variant of :func:`generate_synthetic`: class ``c`` is shifted by
    ``(c - (n_classes-1)/2) * separation`` along ``direction`` (an index into
    the eigenvector basis, or an explicit d-vector). Classes are balanced."""
    raw = generate_synthetic(spec)
    Q = raw.meta["eigenvectors"]
    if direction is None:
        direction = min(spec.d - 1, 2)
    u = Q[:, direction] if np.isscalar(direction) else np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    rng = np.random.default_rng([spec.seed, 7919])
    y = rng.permutation(np.arange(spec.n) % n_classes)
    offsets = (y - (n_classes - 1) / 2.0) * separation
    X = raw.values + offsets[:, None] * u
    meta = dict(raw.meta, class_direction=u, separation=separation)
    return RawDataset(X, y, None, meta)
