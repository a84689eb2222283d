import numpy as np
import pytest

from gesturekit import (
    ClassId,
    DimensionMismatchError,
    KnnClassifier,
    LogisticRegressionClassifier,
    NearestCentroidClassifier,
    NotFittedError,
    make_classes,
)
from gesturekit.classify import catalog_from_targets, logistic_gradient, logistic_loss


def ids(labels):
    catalog = {}
    out = []
    for label in labels:
        if label not in catalog:
            catalog[label] = ClassId(len(catalog), str(label))
        out.append(catalog[label])
    return out


def knn_oracle(train_x, train_y, query, k, n_classes):
    """Exhaustive-sort reference: squared distance, insertion-order ties,
    majority vote with lowest-class-index ties."""
    scored = []
    for i, row in enumerate(train_x):
        d2 = sum((float(a) - float(b)) ** 2 for a, b in zip(row, query))
        scored.append((d2, i))
    scored.sort()
    counts = [0] * n_classes
    for _, i in scored[:k]:
        counts[train_y[i]] += 1
    return max(range(n_classes), key=lambda c: (counts[c], -c))


class TestKnn:
    def test_nearest_single_neighbor(self):
        x = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 10.0]])
        y = ids(["A", "A", "B"])
        clf = KnnClassifier(k=1)
        clf.fit(x, y)
        assert clf.predict([0.2, 0.0]).label == "A"

    def test_majority_beats_nearest(self):
        # B is nearest to the query but A holds 2 of the 3 votes.
        x = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 10.0]])
        y = ids(["A", "A", "B"])
        clf = KnnClassifier(k=3)
        clf.fit(x, y)
        assert clf.predict([10.0, 10.0]).label == "A"

    def test_training_point_maps_to_own_class(self):
        x = np.array([[0.0, 1.0], [5.0, 5.0], [-3.0, 2.0]])
        y = ids(["A", "B", "C"])
        clf = KnnClassifier(k=1)
        clf.fit(x, y)
        for row, cid in zip(x, y):
            assert clf.predict(row) == cid

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            KnnClassifier(k=1).predict([0.0])

    def test_k_larger_than_train_rejected(self):
        with pytest.raises(ValueError):
            KnnClassifier(k=5).fit(np.zeros((3, 2)), ids(["A", "A", "B"]))

    def test_dimension_mismatch(self):
        clf = KnnClassifier(k=1)
        clf.fit(np.zeros((2, 3)), ids(["A", "B"]))
        with pytest.raises(DimensionMismatchError):
            clf.predict([0.0, 0.0])

    def test_equal_distances_keep_insertion_order(self):
        # Both training points are equidistant from the query; the first
        # inserted one must win the single slot.
        x = np.array([[1.0, 0.0], [-1.0, 0.0]])
        clf = KnnClassifier(k=1)
        clf.fit(x, ids(["B", "A"]))  # B first, index order: B=0? no: B gets 0
        assert clf.predict([0.0, 0.0]).label == "B"

    def test_vote_tie_goes_to_lowest_class_index(self):
        x = np.array([[1.0, 0.0], [-1.0, 0.0]])
        y = [ClassId(1, "B"), ClassId(0, "A")]
        clf = KnnClassifier(k=2)
        clf.fit(x, y)
        assert clf.predict([0.0, 0.0]).index == 0

    def test_scale_invariance_of_prediction(self, rng):
        x = rng.normal(size=(40, 8))
        y = ids(rng.integers(0, 4, size=40).tolist())
        clf, scaled = KnnClassifier(k=5), KnnClassifier(k=5)
        clf.fit(x, y)
        scaled.fit(x * 37.5, y)
        for _ in range(20):
            q = rng.normal(size=8)
            assert clf.predict(q) == scaled.predict(q * 37.5)

    def test_matches_oracle_on_random_instances(self, rng):
        for _ in range(100):
            n = int(rng.integers(3, 60))
            dim = int(rng.integers(1, 16))
            n_classes = min(int(rng.integers(1, 5)), n)
            x = rng.normal(size=(n, dim))
            raw = rng.integers(0, n_classes, size=n)
            raw[:n_classes] = np.arange(n_classes)  # keep indices dense
            y = [ClassId(int(v), str(v)) for v in raw]
            clf5 = {k: KnnClassifier(k=k) for k in (1, 3, 5) if k <= n}
            for k, clf in clf5.items():
                clf.fit(x, y)
            q = rng.normal(size=dim)
            for k, clf in clf5.items():
                want = knn_oracle(x, raw.tolist(), q, k, n_classes)
                assert clf.predict(q).index == want


class TestNearestCentroid:
    def test_prototype_exact_match(self):
        x = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0]])
        y = ids(["A", "B", "B"])
        clf = NearestCentroidClassifier()
        clf.fit(x, y)
        assert clf.predict([0.0, 0.0]).label == "A"
        assert clf.predict([2.0, 1.0]).label == "B"  # B's centroid exactly

    def test_nearer_prototype_wins(self):
        clf = NearestCentroidClassifier()
        clf.fit(np.array([[0.0, 0.0], [2.0, 0.0]]), ids(["A", "B"]))
        assert clf.predict([0.9, 0.0]).label == "A"

    def test_equidistant_goes_to_lowest_index(self):
        clf = NearestCentroidClassifier()
        clf.fit(np.array([[0.0, 0.0], [2.0, 0.0]]), ids(["A", "B"]))
        assert clf.predict([1.0, 0.0]).index == 0

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            NearestCentroidClassifier().predict([0.0])


class TestLogisticRegression:
    def test_separable_1d(self):
        x = np.array([[-2.0], [-1.0], [1.0], [2.0]])
        y = ids(["A", "A", "B", "B"])
        clf = LogisticRegressionClassifier(epochs=2000, learning_rate=0.5)
        clf.fit(x, y)
        assert clf.predict([-3.0]).label == "A"
        assert clf.predict([3.0]).label == "B"

    def test_single_point_per_class(self):
        x = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]])
        y = ids(["A", "B", "C"])
        clf = LogisticRegressionClassifier(epochs=1500, learning_rate=0.5)
        clf.fit(x, y)
        for row, cid in zip(x, y):
            assert clf.predict(row) == cid

    def test_zero_epochs_scores_uniform_argmax_first(self):
        x = np.array([[1.0], [2.0]])
        clf = LogisticRegressionClassifier(epochs=0)
        clf.fit(x, ids(["A", "B"]))
        scores = clf.predict_scores([5.0])
        np.testing.assert_allclose(scores, [0.5, 0.5])
        assert clf.predict([5.0]).index == 0

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            LogisticRegressionClassifier().predict([0.0])

    def test_divergence_raises_non_finite_loss(self):
        from gesturekit import NonFiniteLossError

        x = np.array([[-2.0], [-1.0], [1.0], [2.0]])
        clf = LogisticRegressionClassifier(epochs=300, learning_rate=10.0, l2=10.0)
        with pytest.raises(NonFiniteLossError):
            clf.fit(x, ids(["A", "A", "B", "B"]))

    def test_gradient_matches_central_differences(self, rng):
        h = 1e-6
        for _ in range(30):
            n, dim = int(rng.integers(2, 20)), int(rng.integers(1, 6))
            x = rng.normal(size=(n, dim))
            t = rng.integers(0, 2, size=n).astype(float)
            w = rng.normal(size=dim) * 0.5
            b = float(rng.normal() * 0.5)
            l2 = float(rng.uniform(0, 0.3))
            grad_w, grad_b = logistic_gradient(w, b, x, t, l2)
            fd_w = np.empty(dim)
            for j in range(dim):
                e = np.zeros(dim)
                e[j] = h
                fd_w[j] = (logistic_loss(w + e, b, x, t, l2) - logistic_loss(w - e, b, x, t, l2)) / (2 * h)
            fd_b = (logistic_loss(w, b + h, x, t, l2) - logistic_loss(w, b - h, x, t, l2)) / (2 * h)
            denom = max(np.linalg.norm(grad_w), np.linalg.norm(fd_w), 1e-12)
            assert np.linalg.norm(grad_w - fd_w) / denom < 1e-5
            assert abs(grad_b - fd_b) / max(abs(grad_b), abs(fd_b), 1e-12) < 1e-5


class TestCatalog:
    def test_make_classes(self):
        classes = make_classes(["fist", "palm"])
        assert classes == [ClassId(0, "fist"), ClassId(1, "palm")]

    def test_rejects_sparse_indices(self):
        with pytest.raises(ValueError):
            catalog_from_targets([ClassId(0, "a"), ClassId(2, "c")])

    def test_rejects_conflicting_labels(self):
        with pytest.raises(ValueError):
            catalog_from_targets([ClassId(0, "a"), ClassId(0, "b")])
