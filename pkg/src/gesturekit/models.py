"""Versioned JSON persistence for trained models.

A file stores its format_version; loading a file newer than this library
understands is an error rather than a silent misread. KNN persists its
training set, logistic regression its weight matrix, nearest-centroid its
prototypes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import (
    ClassId,
    KnnClassifier,
    LogisticRegressionClassifier,
    NearestCentroidClassifier,
    StaticClassifier,
)
from .errors import GestureKitError, UnsupportedVersionError
from .filtering import Fusion, RepresentativeSet, Similarity
from .spotting import DynamicModel, GestureTemplate
from .trajectory import Direction, QuantizedTrajectory

FORMAT_VERSION = 1


@dataclass
class StaticModel:
    """A trained static-gesture pipeline: vector form, filter, classifier."""

    classes: list[ClassId]
    classifier: StaticClassifier
    filter: RepresentativeSet | None = None
    num_hands: int = 1
    normalize: bool = True


def _classes_to_json(classes) -> list[dict]:
    return [{"index": c.index, "label": c.label} for c in classes]


def _classes_from_json(items) -> list[ClassId]:
    return [ClassId(index=item["index"], label=item["label"]) for item in items]


def _classifier_to_json(clf: StaticClassifier) -> dict:
    if isinstance(clf, KnnClassifier):
        return {
            "kind": "knn",
            "k": clf.k,
            "vectors": clf._x.tolist(),
            "targets": clf._y.tolist(),
        }
    if isinstance(clf, NearestCentroidClassifier):
        return {"kind": "centroid", "prototypes": clf._prototypes.tolist()}
    if isinstance(clf, LogisticRegressionClassifier):
        return {
            "kind": "logreg",
            "epochs": clf.epochs,
            "learning_rate": clf.learning_rate,
            "l2": clf.l2,
            "weights": clf._weights.tolist(),
            "bias": clf._bias.tolist(),
        }
    raise GestureKitError(f"cannot persist classifier of type {type(clf).__name__}")


def _classifier_from_json(doc: dict, classes: list[ClassId]) -> StaticClassifier:
    kind = doc.get("kind")
    if kind == "knn":
        clf = KnnClassifier(k=doc["k"])
        clf.classes = classes
        clf._x = np.asarray(doc["vectors"], dtype=np.float64)
        clf._y = np.asarray(doc["targets"], dtype=np.intp)
        return clf
    if kind == "centroid":
        clf = NearestCentroidClassifier()
        clf.classes = classes
        clf._prototypes = np.asarray(doc["prototypes"], dtype=np.float64)
        return clf
    if kind == "logreg":
        clf = LogisticRegressionClassifier(
            epochs=doc["epochs"], learning_rate=doc["learning_rate"], l2=doc["l2"]
        )
        clf.classes = classes
        clf._weights = np.asarray(doc["weights"], dtype=np.float64)
        clf._bias = np.asarray(doc["bias"], dtype=np.float64)
        return clf
    raise GestureKitError(f"unknown classifier kind {kind!r} in model file")


def _filter_to_json(filt: RepresentativeSet | None) -> dict | None:
    if filt is None:
        return None
    return {
        "classes": _classes_to_json(filt.classes),
        "prototypes": filt.prototypes.tolist(),
        "fusion": filt.fusion.value,
        "similarity": filt.similarity.value,
        "mu": filt.mu,
    }


def _filter_from_json(doc: dict | None) -> RepresentativeSet | None:
    if doc is None:
        return None
    return RepresentativeSet(
        classes=tuple(_classes_from_json(doc["classes"])),
        prototypes=np.asarray(doc["prototypes"], dtype=np.float64),
        fusion=Fusion(doc["fusion"]),
        similarity=Similarity(doc["similarity"]),
        mu=doc["mu"],
    )


def _static_to_dict(model: StaticModel) -> dict:
    return {
        "kind": "static",
        "classes": _classes_to_json(model.classes),
        "num_hands": model.num_hands,
        "normalize": model.normalize,
        "filter": _filter_to_json(model.filter),
        "classifier": _classifier_to_json(model.classifier),
    }


def _static_from_dict(doc: dict) -> StaticModel:
    classes = _classes_from_json(doc["classes"])
    return StaticModel(
        classes=classes,
        classifier=_classifier_from_json(doc["classifier"], classes),
        filter=_filter_from_json(doc.get("filter")),
        num_hands=doc["num_hands"],
        normalize=doc["normalize"],
    )


def _template_to_dict(t: GestureTemplate) -> dict:
    return {
        "gesture": {"index": t.gesture.index, "label": t.gesture.label},
        "start_shape": {"index": t.start_shape.index, "label": t.start_shape.label},
        "end_shape": None if t.end_shape is None else {"index": t.end_shape.index, "label": t.end_shape.label},
        "steps": [[d.dx, d.dy, d.dz] for d in t.trajectory],
        "step_scale": t.step_scale,
    }


def _template_from_dict(doc: dict) -> GestureTemplate:
    end = doc.get("end_shape")
    return GestureTemplate(
        gesture=ClassId(**doc["gesture"]),
        start_shape=ClassId(**doc["start_shape"]),
        end_shape=None if end is None else ClassId(**end),
        trajectory=QuantizedTrajectory(tuple(Direction(*step) for step in doc["steps"])),
        step_scale=doc["step_scale"],
    )


def _dynamic_to_dict(model: DynamicModel, shape_model: StaticModel) -> dict:
    return {
        "kind": "dynamic",
        "shape_model": _static_to_dict(shape_model),
        "deadzone": model.deadzone,
        "keyframes": model.keyframes,
        "num_hands": model.num_hands,
        "normalize": model.normalize,
        "z_weight": model.z_weight,
        "flip_y": model.flip_y,
        "templates": [_template_to_dict(t) for t in model.templates],
    }


def save_static_model(model: StaticModel, path: str | Path) -> None:
    doc = {"format_version": FORMAT_VERSION, **_static_to_dict(model)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def save_dynamic_model(model: DynamicModel, shape_model: StaticModel, path: str | Path) -> None:
    """Persist a dynamic model; the shape classifier rides along inside."""
    doc = {"format_version": FORMAT_VERSION, **_dynamic_to_dict(model, shape_model)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _load_doc(path: str | Path, expected_kind: str) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    version = doc.get("format_version")
    if not isinstance(version, int):
        raise GestureKitError(f"{path}: missing format_version")
    if version > FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: format_version {version} is newer than the supported {FORMAT_VERSION}"
        )
    if doc.get("kind") != expected_kind:
        raise GestureKitError(f"{path}: expected a {expected_kind} model, found {doc.get('kind')!r}")
    return doc


def load_static_model(path: str | Path) -> StaticModel:
    return _static_from_dict(_load_doc(path, "static"))


def load_dynamic_model(path: str | Path) -> tuple[DynamicModel, StaticModel]:
    doc = _load_doc(path, "dynamic")
    shape_model = _static_from_dict(doc["shape_model"])
    model = DynamicModel(
        templates=tuple(_template_from_dict(t) for t in doc["templates"]),
        shape_classifier=shape_model.classifier,
        deadzone=doc["deadzone"],
        keyframes=doc["keyframes"],
        num_hands=doc["num_hands"],
        normalize=doc["normalize"],
        z_weight=doc["z_weight"],
        flip_y=doc["flip_y"],
    )
    return model, shape_model
