"""Static gesture classifiers over landmark feature vectors.

Any classifier with fit/predict/predict_scores plugs into the pipeline; the
built-ins are k-nearest-neighbours, nearest-centroid, and one-vs-rest
logistic regression. All tie-breaks resolve to the lowest class index so
predictions are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import DimensionMismatchError, NonFiniteLossError, NotFittedError


@dataclass(frozen=True)
class ClassId:
    """A gesture class: dense non-negative index plus a human-readable label."""

    index: int
    label: str

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("class index must be non-negative")


def make_classes(labels: Sequence[str]) -> list[ClassId]:
    """Build a dense ClassId catalog from labels (index = position)."""
    return [ClassId(i, label) for i, label in enumerate(labels)]


def catalog_from_targets(targets: Sequence[ClassId]) -> list[ClassId]:
    """Validate and extract the class catalog from per-sample targets.

    Indices must be dense in [0, C) and each index must map to one label.
    """
    by_index: dict[int, str] = {}
    for cid in targets:
        label = by_index.get(cid.index)
        if label is None:
            by_index[cid.index] = cid.label
        elif label != cid.label:
            raise ValueError(f"class index {cid.index} maps to both {label!r} and {cid.label!r}")
    count = len(by_index)
    if sorted(by_index) != list(range(count)):
        raise ValueError(f"class indices must be dense in [0, {count}), got {sorted(by_index)}")
    return [ClassId(i, by_index[i]) for i in range(count)]


class StaticClassifier(Protocol):
    """Contract for pluggable classifiers: fit before predict, deterministic."""

    def fit(self, vectors: np.ndarray, targets: Sequence[ClassId]) -> None:
        ...

    def predict(self, vector: np.ndarray) -> ClassId:
        ...

    def predict_scores(self, vector: np.ndarray) -> np.ndarray:
        ...


def _as_matrix(vectors) -> np.ndarray:
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d training matrix, got shape {x.shape}")
    return x


def _check_query(vector, dim: int) -> np.ndarray:
    q = np.asarray(vector, dtype=np.float64).ravel()
    if q.shape != (dim,):
        raise DimensionMismatchError(f"query has dimension {q.shape[0]}, classifier was fit with {dim}")
    return q


class KnnClassifier:
    """Majority vote among the k nearest training vectors (Euclidean).

    Equal distances keep training insertion order; vote ties go to the
    lowest class index.
    """

    def __init__(self, k: int = 5):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k
        self._x: np.ndarray | None = None
        self._y: np.ndarray | None = None
        self.classes: list[ClassId] = []

    def fit(self, vectors: np.ndarray, targets: Sequence[ClassId]) -> None:
        x = _as_matrix(vectors)
        if len(targets) != x.shape[0]:
            raise DimensionMismatchError("one target per training vector required")
        if self.k > x.shape[0]:
            raise ValueError(f"k={self.k} exceeds the {x.shape[0]} training samples")
        self.classes = catalog_from_targets(targets)
        self._x = x
        self._y = np.array([t.index for t in targets], dtype=np.intp)

    def _neighbor_indices(self, q: np.ndarray) -> np.ndarray:
        # Squared distances: same ordering, no sqrt. Stable sort preserves
        # insertion order among exact ties.
        d2 = ((self._x - q) ** 2).sum(axis=1)
        return np.argsort(d2, kind="stable")[: self.k]

    def predict_scores(self, vector: np.ndarray) -> np.ndarray:
        if self._x is None:
            raise NotFittedError("fit() the classifier first")
        q = _check_query(vector, self._x.shape[1])
        votes = self._y[self._neighbor_indices(q)]
        counts = np.bincount(votes, minlength=len(self.classes))
        return counts / float(self.k)

    def predict(self, vector: np.ndarray) -> ClassId:
        scores = self.predict_scores(vector)
        return self.classes[int(np.argmax(scores))]


class NearestCentroidClassifier:
    """Predicts the class whose training-mean prototype is nearest."""

    def __init__(self):
        self.classes: list[ClassId] = []
        self._prototypes: np.ndarray | None = None

    def fit(self, vectors: np.ndarray, targets: Sequence[ClassId]) -> None:
        x = _as_matrix(vectors)
        if len(targets) != x.shape[0]:
            raise DimensionMismatchError("one target per training vector required")
        self.classes = catalog_from_targets(targets)
        y = np.array([t.index for t in targets], dtype=np.intp)
        self._prototypes = np.stack([x[y == c.index].mean(axis=0) for c in self.classes])

    def predict_scores(self, vector: np.ndarray) -> np.ndarray:
        if self._prototypes is None:
            raise NotFittedError("fit() the classifier first")
        q = _check_query(vector, self._prototypes.shape[1])
        d = np.sqrt(((self._prototypes - q) ** 2).sum(axis=1))
        return -d  # higher is better

    def predict(self, vector: np.ndarray) -> ClassId:
        return self.classes[int(np.argmax(self.predict_scores(vector)))]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(weights: np.ndarray, bias: float, x: np.ndarray, targets: np.ndarray, l2: float) -> float:
    """Mean binary cross-entropy plus 0.5 * l2 * ||w||^2 (bias unpenalized)."""
    z = x @ weights + bias
    data = np.mean(np.logaddexp(0.0, z) - targets * z)
    return float(data + 0.5 * l2 * np.dot(weights, weights))


def logistic_gradient(
    weights: np.ndarray, bias: float, x: np.ndarray, targets: np.ndarray, l2: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of :func:`logistic_loss` in (weights, bias)."""
    err = _sigmoid(x @ weights + bias) - targets
    grad_w = x.T @ err / x.shape[0] + l2 * weights
    grad_b = float(err.mean())
    return grad_w, grad_b


class LogisticRegressionClassifier:
    """One-vs-rest logistic regression trained by full-batch gradient descent.

    Weights start at zero, so training is deterministic; before any epoch has
    run all classes score 0.5 and argmax falls to class 0.
    """

    def __init__(self, epochs: int = 500, learning_rate: float = 0.1, l2: float = 0.0):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2
        self.classes: list[ClassId] = []
        self._weights: np.ndarray | None = None  # (C, D)
        self._bias: np.ndarray | None = None  # (C,)

    def fit(self, vectors: np.ndarray, targets: Sequence[ClassId]) -> None:
        x = _as_matrix(vectors)
        if len(targets) != x.shape[0]:
            raise DimensionMismatchError("one target per training vector required")
        self.classes = catalog_from_targets(targets)
        if len(self.classes) < 2:
            raise ValueError("logistic regression needs at least 2 classes")
        y = np.array([t.index for t in targets], dtype=np.intp)

        n_classes, dim = len(self.classes), x.shape[1]
        weights = np.zeros((n_classes, dim))
        bias = np.zeros(n_classes)
        onehot = (y[:, None] == np.arange(n_classes)[None, :]).astype(np.float64)

        # Overflow here is the divergence we detect and report, not a bug.
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.epochs):
                for c in range(n_classes):
                    grad_w, grad_b = logistic_gradient(weights[c], bias[c], x, onehot[:, c], self.l2)
                    weights[c] -= self.learning_rate * grad_w
                    bias[c] -= self.learning_rate * grad_b
                if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
                    raise NonFiniteLossError("training diverged; lower the learning rate")

        self._weights = weights
        self._bias = bias

    def predict_scores(self, vector: np.ndarray) -> np.ndarray:
        if self._weights is None:
            raise NotFittedError("fit() the classifier first")
        q = _check_query(vector, self._weights.shape[1])
        return _sigmoid(self._weights @ q + self._bias)

    def predict(self, vector: np.ndarray) -> ClassId:
        return self.classes[int(np.argmax(self.predict_scores(vector)))]
