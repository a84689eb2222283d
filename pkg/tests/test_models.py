import json

import numpy as np
import pytest

from gesturekit import (
    CandidateEngine,
    ClassId,
    GestureKitError,
    KnnClassifier,
    LogisticRegressionClassifier,
    NearestCentroidClassifier,
    SpotterConfig,
    UnsupportedVersionError,
    build_filter,
    load_dynamic_model,
    load_static_model,
    save_dynamic_model,
    save_static_model,
)
from gesturekit.models import StaticModel

from test_spotting import RIGHT_PATH, fit_basic, keyframe_stream, make_shape_classifier, RIGHT


A, B = ClassId(0, "A"), ClassId(1, "B")
X = np.array([[0.0, 0.0], [0.1, 0.2], [3.0, 3.0], [3.1, 2.9]])
Y = [A, A, B, B]


@pytest.mark.parametrize(
    "classifier",
    [
        KnnClassifier(k=1),
        NearestCentroidClassifier(),
        LogisticRegressionClassifier(epochs=300, learning_rate=0.5),
    ],
)
def test_static_round_trip_preserves_predictions(tmp_path, classifier, rng):
    classifier.fit(X, Y)
    filt = build_filter({A: [X[0], X[1]], B: [X[2], X[3]]}, mu=0.8)
    model = StaticModel(classes=[A, B], classifier=classifier, filter=filt, num_hands=1, normalize=True)
    path = tmp_path / "model.json"
    save_static_model(model, path)
    loaded = load_static_model(path)

    assert loaded.classes == [A, B]
    assert loaded.num_hands == 1 and loaded.normalize is True
    assert loaded.filter.mu == 0.8
    np.testing.assert_allclose(loaded.filter.prototypes, filt.prototypes)
    for _ in range(25):
        q = rng.normal(size=2) * 3
        assert loaded.classifier.predict(q) == classifier.predict(q)
        np.testing.assert_allclose(loaded.classifier.predict_scores(q), classifier.predict_scores(q))


def test_static_without_filter(tmp_path):
    clf = KnnClassifier(k=1)
    clf.fit(X, Y)
    save_static_model(StaticModel(classes=[A, B], classifier=clf), tmp_path / "m.json")
    loaded = load_static_model(tmp_path / "m.json")
    assert loaded.filter is None


def test_dynamic_round_trip_preserves_behavior(tmp_path):
    model = fit_basic()
    _, shape_classes = make_shape_classifier()
    shape_model = StaticModel(classes=shape_classes, classifier=model.shape_classifier)
    path = tmp_path / "dyn.json"
    save_dynamic_model(model, shape_model, path)
    loaded, loaded_shapes = load_dynamic_model(path)

    assert loaded.deadzone == model.deadzone
    assert loaded.keyframes == model.keyframes
    assert loaded.templates == model.templates
    assert loaded_shapes.classes == shape_classes

    engine = CandidateEngine(loaded, SpotterConfig(update_interval=1))
    events = [engine.step(f) for f in keyframe_stream(RIGHT_PATH, 0)]
    assert [e for e in events if e is not None] == [RIGHT]


def test_newer_format_rejected(tmp_path):
    clf = KnnClassifier(k=1)
    clf.fit(X, Y)
    path = tmp_path / "m.json"
    save_static_model(StaticModel(classes=[A, B], classifier=clf), path)
    doc = json.loads(path.read_text())
    doc["format_version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(UnsupportedVersionError):
        load_static_model(path)


def test_kind_mismatch_rejected(tmp_path):
    clf = KnnClassifier(k=1)
    clf.fit(X, Y)
    path = tmp_path / "m.json"
    save_static_model(StaticModel(classes=[A, B], classifier=clf), path)
    with pytest.raises(GestureKitError):
        load_dynamic_model(path)


def test_missing_version_rejected(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"kind": "static"}))
    with pytest.raises(GestureKitError):
        load_static_model(path)
