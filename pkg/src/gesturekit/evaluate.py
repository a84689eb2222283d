"""Detection-rate / accuracy benchmark: m = c * r under n-shot training.

The score a model earns on a dataset is the product of its detection rate
r = detected/total and its classification accuracy c over the detected
samples, so a model that finds more hands wins even at equal accuracy.
Training subsamples n items per class at random; evaluation runs on the
remainder, repeated with fresh draws to measure spread.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .augment import AugmentationSetting
from .classify import (
    KnnClassifier,
    LogisticRegressionClassifier,
    NearestCentroidClassifier,
    StaticClassifier,
    make_classes,
)
from .detection import ReplayStore, detect_with_augmentations, load_replay, replay_detector
from .errors import (
    GestureKitError,
    InsufficientSamplesError,
    InvalidCountsError,
    NoHandDetectedError,
)
from .filtering import Fusion, RepresentativeSet, Similarity, build_filter, classify
from .landmarks import LandmarkFrame, strip_handedness, vectorize

REJECTED_LABEL = "(rejected)"


@dataclass(frozen=True)
class RunMetrics:
    """Counts and derived scores of one evaluation run."""

    total: int
    detected: int
    correct: int
    r: float
    c: float
    m: float


def compute_metric(total: int, detected: int, correct: int) -> RunMetrics:
    """Derive r, c and m from raw counts.

    r = detected/total, c = correct/detected (0 when nothing was detected),
    m = c * r.

    Raises:
        InvalidCountsError: unless 0 <= correct <= detected <= total.
    """
    if not 0 <= correct <= detected <= total:
        raise InvalidCountsError(f"need 0 <= correct <= detected <= total, got {(total, detected, correct)}")
    r = detected / total if total else 0.0
    c = correct / detected if detected else 0.0
    return RunMetrics(total=total, detected=detected, correct=correct, r=r, c=c, m=c * r)


@dataclass(frozen=True)
class NShotPlan:
    """How to subsample training data: n per class, repeated with a seed."""

    n: int
    repetitions: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class ClassifierConfig:
    """Which built-in classifier to train, with its hyperparameters."""

    kind: str = "knn"
    k: int = 5
    epochs: int = 500
    learning_rate: float = 0.1
    l2: float = 0.0

    def build(self) -> StaticClassifier:
        if self.kind == "knn":
            return KnnClassifier(k=self.k)
        if self.kind == "centroid":
            return NearestCentroidClassifier()
        if self.kind == "logreg":
            return LogisticRegressionClassifier(
                epochs=self.epochs, learning_rate=self.learning_rate, l2=self.l2
            )
        raise ValueError(f"unknown classifier kind {self.kind!r}")


@dataclass(frozen=True)
class FilterConfig:
    """False-positive filter settings; omit the config to skip the filter."""

    similarity: Similarity = Similarity.COSINE
    fusion: Fusion = Fusion.MEAN
    mu: float = 0.93


@dataclass(frozen=True)
class VectorConfig:
    """How frames turn into classifier inputs."""

    num_hands: int = 1
    normalize: bool = True


@dataclass
class EvalReport:
    """Aggregated n-shot results: totals, per-run metrics and their spread."""

    total: int
    detected: int
    correct: int
    r: float
    c: float
    m: float
    m_mean: float
    m_std: float
    repetitions: list[RunMetrics] = field(default_factory=list)
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "detected": self.detected,
            "correct": self.correct,
            "r": self.r,
            "c": self.c,
            "m": self.m,
            "m_mean": self.m_mean,
            "m_std": self.m_std,
            "repetitions": [
                {"total": x.total, "detected": x.detected, "correct": x.correct, "r": x.r, "c": x.c, "m": x.m}
                for x in self.repetitions
            ],
            "confusion": self.confusion,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


@dataclass(frozen=True)
class StaticDataset:
    """Pre-extracted detections plus a label per sample."""

    store: ReplayStore
    labels: Mapping[str, str]

    def by_class(self) -> dict[str, list[str]]:
        """Sample ids grouped by label; labels sorted, ids in store order."""
        groups: dict[str, list[str]] = {label: [] for label in sorted(set(self.labels.values()))}
        for sid in self.store.sample_ids():
            label = self.labels.get(sid)
            if label is not None:
                groups[label].append(sid)
        return groups


def load_labels(path: str | Path) -> dict[str, str]:
    """Read a labels.csv with header sample_id,class_label."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "sample_id" not in fields or "class_label" not in fields:
            raise GestureKitError(f"{path}: labels file needs sample_id and class_label columns, got {fields}")
        return {row["sample_id"]: row["class_label"] for row in reader}


def load_static_dataset(directory: str | Path) -> StaticDataset:
    """Load every *.jsonl replay file plus labels.csv from a directory."""
    directory = Path(directory)
    labels = load_labels(directory / "labels.csv")
    store = ReplayStore()
    files = sorted(directory.glob("*.jsonl"))
    if not files:
        raise GestureKitError(f"{directory}: no .jsonl replay files found")
    for file in files:
        for key, frame in load_replay(file).items():
            store.put(key, frame)
    return StaticDataset(store=store, labels=labels)


def _detect(store_detector, setting, sample_id) -> LandmarkFrame | None:
    try:
        frame, _ = detect_with_augmentations(None, setting, store_detector, sample_id)
        return frame
    except NoHandDetectedError:
        return None


def run_nshot(
    dataset: StaticDataset,
    plan: NShotPlan,
    setting: AugmentationSetting,
    classifier: ClassifierConfig | None = None,
    filter_config: FilterConfig | None = None,
    vectors: VectorConfig | None = None,
) -> EvalReport:
    """Run the full n-shot protocol on a replayed dataset.

    Per repetition: draw n training samples per class with the seeded
    generator (PCG64 keyed by (seed, repetition)), train on the detected
    ones, evaluate on every remaining sample. Training samples in which no
    stage detects a hand are skipped; a class losing all its training
    samples that way is left out of the classifier for that repetition, so
    its evaluation samples can only count against accuracy.

    Raises:
        InsufficientSamplesError: a class has fewer than n+1 samples.
    """
    classifier = classifier or ClassifierConfig()
    vectors = vectors or VectorConfig()
    groups = dataset.by_class()
    for label, ids in groups.items():
        if len(ids) < plan.n + 1:
            raise InsufficientSamplesError(
                f"class {label!r} has {len(ids)} samples; n={plan.n} needs at least {plan.n + 1}"
            )

    detector = replay_detector(dataset.store)
    runs: list[RunMetrics] = []
    confusion: dict[str, dict[str, int]] = {}

    for rep in range(plan.repetitions):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(plan.seed, spawn_key=(rep,))))
        train_ids: dict[str, list[str]] = {}
        eval_ids: list[tuple[str, str]] = []
        for label in sorted(groups):
            ids = groups[label]
            chosen = set(rng.choice(len(ids), size=plan.n, replace=False).tolist())
            train_ids[label] = [ids[i] for i in sorted(chosen)]
            eval_ids.extend((sid, label) for i, sid in enumerate(ids) if i not in chosen)

        # Vectorize the detected training samples per class.
        train_vectors: dict[str, list[np.ndarray]] = {}
        for label, ids in train_ids.items():
            for sid in ids:
                frame = _detect(detector, setting, sid)
                if frame is None:
                    continue
                vec = strip_handedness(vectorize(frame, vectors.num_hands, vectors.normalize))
                train_vectors.setdefault(label, []).append(vec)

        clf: StaticClassifier | None = None
        filt: RepresentativeSet | None = None
        if train_vectors:
            catalog = make_classes(sorted(train_vectors))
            by_id = {c.label: c for c in catalog}
            x = np.stack([v for c in catalog for v in train_vectors[c.label]])
            y = [c for c in catalog for _ in train_vectors[c.label]]
            clf = classifier.build()
            clf.fit(x, y)
            if filter_config is not None:
                filt = build_filter(
                    {by_id[label]: vecs for label, vecs in train_vectors.items()},
                    fusion=filter_config.fusion,
                    similarity=filter_config.similarity,
                    mu=filter_config.mu,
                )

        detected = correct = 0
        for sid, label in eval_ids:
            frame = _detect(detector, setting, sid)
            if frame is None:
                continue
            detected += 1
            vec = strip_handedness(vectorize(frame, vectors.num_hands, vectors.normalize))
            prediction = classify(vec, filt, clf) if clf is not None else None
            predicted_label = prediction.label if prediction is not None else REJECTED_LABEL
            if predicted_label == label:
                correct += 1
            confusion.setdefault(label, {}).setdefault(predicted_label, 0)
            confusion[label][predicted_label] += 1

        runs.append(compute_metric(total=len(eval_ids), detected=detected, correct=correct))

    total = sum(x.total for x in runs)
    detected = sum(x.detected for x in runs)
    correct = sum(x.correct for x in runs)
    overall = compute_metric(total, detected, correct)
    ms = np.array([x.m for x in runs])
    return EvalReport(
        total=total,
        detected=detected,
        correct=correct,
        r=overall.r,
        c=overall.c,
        m=overall.m,
        m_mean=float(ms.mean()),
        m_std=float(ms.std()),
        repetitions=runs,
        confusion=confusion,
    )
