"""False-positive filter: reject vectors that resemble no trained gesture.

Each class is summarized by one prototype (the fusion of its training
vectors). A query passes iff its similarity to some prototype exceeds the
threshold mu; everything else is treated as background, not a gesture. The
filter is optional and sits in front of the classifier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classify import ClassId, StaticClassifier
from .errors import DimensionMismatchError, EmptyClassError, ZeroVectorError


class Fusion(enum.Enum):
    MEAN = "mean"
    MEDIAN = "median"


class Similarity(enum.Enum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True, eq=False)
class RepresentativeSet:
    """Per-class prototypes plus the similarity rule that gates queries.

    For cosine, mu lives in [-1, 1]. Euclidean distance is mapped to the
    similarity 1 / (1 + distance), so mu >= 0 and a single "greater than mu"
    rule covers both metrics.
    """

    classes: tuple[ClassId, ...]
    prototypes: np.ndarray  # (C, D)
    fusion: Fusion
    similarity: Similarity
    mu: float

    def __post_init__(self):
        protos = np.asarray(self.prototypes, dtype=np.float64)
        if protos.ndim != 2 or protos.shape[0] != len(self.classes):
            raise DimensionMismatchError("one prototype row per class required")
        object.__setattr__(self, "prototypes", protos)
        object.__setattr__(self, "classes", tuple(self.classes))
        if self.similarity is Similarity.COSINE and not -1.0 <= self.mu <= 1.0:
            raise ValueError("cosine threshold mu must lie in [-1, 1]")
        if self.similarity is Similarity.EUCLIDEAN and self.mu < 0.0:
            raise ValueError("euclidean-similarity threshold mu must be >= 0")

    @property
    def dim(self) -> int:
        return self.prototypes.shape[1]


def build_filter(
    training: Mapping[ClassId, Sequence[np.ndarray]],
    fusion: Fusion = Fusion.MEAN,
    similarity: Similarity = Similarity.COSINE,
    mu: float = 0.93,
) -> RepresentativeSet:
    """Fuse each class's training vectors into its prototype.

    Mean fusion is the arithmetic mean; median fusion is the component-wise
    median (more robust to outlier samples).

    Raises:
        EmptyClassError: some class has no training vectors.
        DimensionMismatchError: vectors disagree on dimensionality.
        ZeroVectorError: a prototype is all-zero under cosine similarity.
    """
    classes = sorted(training, key=lambda c: c.index)
    if not classes:
        raise EmptyClassError("no classes given")

    rows = []
    dim: int | None = None
    for cid in classes:
        vectors = [np.asarray(v, dtype=np.float64).ravel() for v in training[cid]]
        if not vectors:
            raise EmptyClassError(f"class {cid.label!r} has no training vectors")
        for v in vectors:
            if dim is None:
                dim = v.shape[0]
            elif v.shape[0] != dim:
                raise DimensionMismatchError(
                    f"class {cid.label!r} has a vector of dimension {v.shape[0]}, expected {dim}"
                )
        stacked = np.stack(vectors)
        row = stacked.mean(axis=0) if fusion is Fusion.MEAN else np.median(stacked, axis=0)
        if similarity is Similarity.COSINE and not np.any(row):
            raise ZeroVectorError(f"class {cid.label!r} fuses to the zero vector; cosine similarity undefined")
        rows.append(row)

    return RepresentativeSet(
        classes=tuple(classes),
        prototypes=np.stack(rows),
        fusion=fusion,
        similarity=similarity,
        mu=mu,
    )


def similarities(vector: np.ndarray, filt: RepresentativeSet) -> np.ndarray:
    """Similarity of a query to every prototype, in class-index order."""
    q = np.asarray(vector, dtype=np.float64).ravel()
    if q.shape[0] != filt.dim:
        raise DimensionMismatchError(f"query has dimension {q.shape[0]}, filter expects {filt.dim}")
    if filt.similarity is Similarity.COSINE:
        q_norm = np.linalg.norm(q)
        if q_norm == 0.0:
            raise ZeroVectorError("cosine similarity undefined for the all-zero query")
        p_norms = np.linalg.norm(filt.prototypes, axis=1)
        # Rounding can push the ratio an ulp past 1; keep the mathematical range.
        return np.clip((filt.prototypes @ q) / (p_norms * q_norm), -1.0, 1.0)
    distances = np.sqrt(((filt.prototypes - q) ** 2).sum(axis=1))
    return 1.0 / (1.0 + distances)


def passes_filter(vector: np.ndarray, filt: RepresentativeSet) -> bool:
    """True iff the query's best prototype similarity strictly exceeds mu."""
    return bool(similarities(vector, filt).max() > filt.mu)


def classify(
    vector: np.ndarray,
    filt: RepresentativeSet | None,
    classifier: StaticClassifier,
) -> ClassId | None:
    """Gate the query through the filter (when given), then classify.

    Returns None when the filter rejects the vector. Pass filt=None when the
    input is known to be a valid gesture, e.g. during training.
    """
    if filt is not None and not passes_filter(vector, filt):
        return None
    return classifier.predict(vector)
