import numpy as np
import pytest

from agflow.paths import ProjectionPath
from agflow.selection import (KNN, NearestCentroid, accuracy, evaluate_projection, read_selection,
                              register_learner, select_model)


def test_centroid_tie_goes_to_smaller_class():
    m = NearestCentroid().fit(np.array([[-1.0], [1.0]]), np.array([1, 0]))
    assert m.predict(np.array([[0.0]]))[0] == 0


def test_knn_distance_and_vote_ties():
    X = np.array([[0.0], [2.0], [-2.0], [4.0]])
    m = KNN(2).fit(X, np.array([5, 3, 5, 3]))
    # neighbours of 1.0: rows 0 and 1 (both distance 1) -> one vote each -> smaller class 3
    assert m.predict(np.array([[1.0]]))[0] == 3
    with pytest.raises(ValueError):
        KNN(5).fit(X, np.zeros(4))


def test_knn_beats_centroid_on_xor():
    rng = np.random.default_rng(0)
    centers = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float) * 3
    lab = np.array([0, 0, 1, 1])
    idx = rng.integers(0, 4, 200)
    X = centers[idx] + 0.3 * rng.standard_normal((200, 2))
    y = lab[idx]
    tr, te = slice(0, 100), slice(100, 200)
    knn = evaluate_projection(np.eye(2), (X[tr], y[tr]), (X[te], y[te]), "knn", {"k_neighbors": 3})
    cen = evaluate_projection(np.eye(2), (X[tr], y[tr]), (X[te], y[te]), "centroid")
    assert knn > 0.95 and cen < 0.75


def toy_path():
    d = 3
    mats = np.zeros((4, d, 1))
    mats[0, 2, 0] = 1.0  # noise direction
    mats[1, 0, 0] = 1.0  # signal
    mats[2, 0, 0] = 1.0  # same score as entry 1
    mats[3, 1, 0] = 1.0
    valid = np.array([[True], [True], [True], [False]])
    return ProjectionPath([10, 30, 20, 40], [0.4, 0.2, 0.3, 0.1], mats, valid)


def toy_data(seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(60) % 2
    X = rng.standard_normal((60, 3))
    X[:, 0] += 4 * (y - 0.5)
    return (X[:30], y[:30]), (X[30:], y[30:])


def test_select_ties_smallest_k_and_skips_invalid():
    train, val = toy_data()
    res = select_model(toy_path(), train, val)
    assert [k for k, _, _ in res.scores] == [10, 20, 30, 40]
    assert res.scores[-1][2] is None
    assert res.best_k == 20 and res.best_lambda == 0.3
    assert res.best_score == res.scores[1][2] == res.scores[2][2]
    threaded = select_model(toy_path(), train, val, threads=3)
    assert threaded.scores == res.scores


def test_selection_is_sign_invariant():
    train, val = toy_data(1)
    pp = toy_path()
    flipped = ProjectionPath(pp.steps, pp.lambdas, -pp.matrices, pp.valid)
    a, b = select_model(pp, train, val), select_model(flipped, train, val)
    assert [s for *_, s in a.scores] == [s for *_, s in b.scores]


def test_failing_learner_scores_none(tmp_path):
    class Picky:
        def fit(self, X, y):
            if X[:, 0].std() < 1.5:
                raise ValueError("too weak")
            return NearestCentroid().fit(X, y)

    register_learner("picky", lambda **kw: Picky())
    train, val = toy_data()
    res = select_model(toy_path(), train, val, "picky")
    assert res.scores[0][2] is None and res.best_k == 20
    res.test_score = 0.5
    res.write(tmp_path / "s.json")
    doc = read_selection(tmp_path / "s.json")
    assert doc["learner"] == "picky" and doc["test_score"] == 0.5 and doc["schema_version"] == "1.0"


def test_all_failed_raises():
    train, val = toy_data()
    pp = toy_path()
    pp.valid[:] = False
    with pytest.raises(ValueError, match="every"):
        select_model(pp, train, val)


def test_accuracy_checks():
    assert accuracy([1, 0, 1], [1, 1, 1]) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        accuracy([1], [1, 2])
    with pytest.raises(ValueError):
        accuracy([], [])
