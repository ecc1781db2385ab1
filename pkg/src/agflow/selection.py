"""Validation-driven model selection along a projection path."""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataio import SCHEMA_VERSION, check_schema


@dataclass
class ReducedDataset:
    features: np.ndarray
    labels: np.ndarray
    path_index: int = 0
    lambda_equiv: float = float("nan")


def reduce(X_rows, projection):
    X_rows = np.atleast_2d(np.asarray(X_rows, dtype=float))
    projection = np.asarray(projection, dtype=float)
    if projection.ndim == 1:
        projection = projection[:, None]
    if X_rows.shape[1] != projection.shape[0]:
        raise ValueError(f"data width {X_rows.shape[1]} does not match projection rows {projection.shape[0]}")
    return X_rows @ projection


def _sq_dists(A, B):
    d = (A * A).sum(1)[:, None] - 2.0 * (A @ B.T) + (B * B).sum(1)[None, :]
    return np.maximum(d, 0.0)


class NearestCentroid:
    """Predicts the class whose training mean is closest (Euclidean).
    Distance ties go to the smaller class id."""

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if len(X) == 0:
            raise ValueError("cannot fit on an empty training set")
        self.classes_ = np.unique(y)
        self.centroids_ = np.stack([X[y == c].mean(axis=0) for c in self.classes_])
        return self

    def predict(self, X):
        dist = _sq_dists(np.asarray(X, dtype=float), self.centroids_)
        return self.classes_[np.argmin(dist, axis=1)]


class KNN:
    """Majority vote among the k nearest training rows. Distance ties go to
    the lower training index, vote ties to the smaller class id."""

    def __init__(self, k=5):
        self.k = int(k)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        if not 1 <= self.k <= len(X):
            raise ValueError(f"k_neighbors={self.k} must be in [1, {len(X)}]")
        self.X_ = X
        self.classes_, self.codes_ = np.unique(np.asarray(y), return_inverse=True)
        return self

    def predict(self, X):
        dist = _sq_dists(np.asarray(X, dtype=float), self.X_)
        near = np.argsort(dist, axis=1, kind="stable")[:, :self.k]
        votes = np.zeros((dist.shape[0], len(self.classes_)), dtype=int)
        np.add.at(votes, (np.arange(dist.shape[0])[:, None], self.codes_[near]), 1)
        return self.classes_[np.argmax(votes, axis=1)]


def fit_nearest_centroid(train):
    return NearestCentroid().fit(train.features, train.labels)


def fit_knn(train, k_neighbors=5):
    return KNN(k_neighbors).fit(train.features, train.labels)


def accuracy(predictions, truth):
    predictions, truth = np.asarray(predictions), np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {truth.shape}")
    if predictions.size == 0:
        raise ValueError("cannot score empty predictions")
    return float(np.mean(predictions == truth))


LEARNERS = {
    "centroid": lambda **kw: NearestCentroid(),
    "knn": lambda k_neighbors=5, **kw: KNN(k_neighbors),
}
EVALUATORS = {"accuracy": accuracy}


def register_learner(name, factory):
    """``factory(**params)`` must return an object with ``fit(X, y)`` and ``predict(X)``."""
    LEARNERS[name] = factory


def make_learner(learner, params=None):
    if callable(learner) and not isinstance(learner, str):
        return learner(**(params or {}))
    if learner not in LEARNERS:
        raise ValueError(f"unknown learner {learner!r}; choose from {sorted(LEARNERS)}")
    return LEARNERS[learner](**(params or {}))


@dataclass
class SelectionResult:
    scores: list  # (k, lambda, score or None)
    best_k: int
    best_lambda: float
    best_projection: np.ndarray
    learner_tag: str
    evaluator_tag: str = "accuracy"
    test_score: float | None = None

    @property
    def best_score(self):
        return max(s for _, _, s in self.scores if s is not None)

    def to_json(self):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "learner": self.learner_tag,
            "evaluator": self.evaluator_tag,
            "scores": [{"k": int(k), "lambda": float(lam), "score": s} for k, lam, s in self.scores],
            "best_k": int(self.best_k),
            "best_lambda": float(self.best_lambda),
            "best_score": self.best_score,
        }
        if self.test_score is not None:
            doc["test_score"] = float(self.test_score)
        return doc

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")


def read_selection(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    check_schema(doc.get("schema_version"), path)
    return doc


def _score_entry(matrix, ok, train, val, learner, params, evaluate):
    if not ok:
        return None
    try:
        model = make_learner(learner, params).fit(reduce(train[0], matrix), train[1])
        score = float(evaluate(model.predict(reduce(val[0], matrix)), val[1]))
    except (ValueError, FloatingPointError, np.linalg.LinAlgError, ZeroDivisionError):
        return None
    return score if np.isfinite(score) else None


def select_model(path, train, val, learner="centroid", learner_params=None, evaluator="accuracy",
                 threads=1):
    """Score every path entry on the validation split and return the best.

    ``train`` and ``val`` are ``(matrix, labels)`` pairs already centred
    with the training means. Entries whose learner fails score ``None`` and
    never win; ties go to the smallest k.
    """
    if len(path) == 0:
        raise ValueError("empty projection path")
    evaluate = EVALUATORS[evaluator] if isinstance(evaluator, str) else evaluator
    ok = path.entry_valid()
    job = lambda e: _score_entry(path.matrices[e], ok[e], train, val, learner, learner_params, evaluate)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            raw = list(ex.map(job, range(len(path))))
    else:
        raw = [job(e) for e in range(len(path))]

    order = np.argsort(path.steps, kind="stable")
    scores = [(int(path.steps[e]), float(path.lambdas[e]), raw[e]) for e in order]
    present = [(s, k, e) for (k, _, s), e in zip(scores, order) if s is not None]
    if not present:
        raise ValueError("every path entry failed to produce a score")
    best = max(s for s, _, _ in present)
    best_k, best_e = min((k, e) for s, k, e in present if s == best)
    tag = learner if isinstance(learner, str) else getattr(learner, "__name__", "custom")
    return SelectionResult(scores, best_k, float(path.lambdas[best_e]), path.matrices[best_e].copy(),
                           tag, evaluator if isinstance(evaluator, str) else "custom")


def evaluate_projection(projection, train, test, learner="centroid", learner_params=None):
    model = make_learner(learner, learner_params).fit(reduce(train[0], projection), train[1])
    return accuracy(model.predict(reduce(test[0], projection)), test[1])
