"""Command line front end.

Subcommands: train-static, eval-static, train-dynamic, run-online,
augment-preview. Exit codes: 0 success, 1 usage error, 2 data/format error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import cv2
import numpy as np

from .augment import AugmentationSetting, AugmentationStage, Image, apply_stage, builtin_setting
from .classify import KnnClassifier, make_classes
from .detection import detect_with_augmentations, load_replay, load_replay_lines, replay_detector, sequence_from_store
from .errors import GestureKitError, NoHandDetectedError
from .evaluate import (
    ClassifierConfig,
    FilterConfig,
    NShotPlan,
    VectorConfig,
    load_static_dataset,
    run_nshot,
)
from .filtering import Fusion, Similarity, build_filter
from .landmarks import strip_handedness, vectorize
from .models import (
    StaticModel,
    load_dynamic_model,
    save_dynamic_model,
    save_static_model,
)
from .spotting import CandidateEngine, SpotterConfig, fit_dynamic

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def parse_setting(value: str) -> AugmentationSetting:
    """A setting is a built-in id 1-4 or a JSON file of [delta_b, delta_r] pairs."""
    if value.isdigit():
        return builtin_setting(int(value))
    doc = json.loads(Path(value).read_text(encoding="utf-8"))
    stages = doc["stages"] if isinstance(doc, dict) else doc
    if not isinstance(stages, list) or not stages:
        raise GestureKitError(f"{value}: expected a non-empty list of [delta_b, delta_r] pairs")
    parsed = []
    for pair in stages:
        if not isinstance(pair, list) or len(pair) != 2 or not all(isinstance(x, int) for x in pair):
            raise GestureKitError(f"{value}: bad stage {pair!r}; stages are [delta_b, delta_r] integer pairs")
        parsed.append(AugmentationStage(*pair))
    return AugmentationSetting(tuple(parsed))


def _classifier_config(args) -> ClassifierConfig:
    return ClassifierConfig(
        kind=args.classifier, k=args.k, epochs=args.epochs, learning_rate=args.lr, l2=args.l2
    )


def _filter_config(args) -> FilterConfig | None:
    if args.filter == "none":
        return None
    return FilterConfig(similarity=Similarity(args.filter), fusion=Fusion(args.fusion), mu=args.mu)


def _add_classifier_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--classifier", choices=["knn", "centroid", "logreg"], default="knn")
    p.add_argument("--k", type=int, default=5, help="neighbours for knn")
    p.add_argument("--epochs", type=int, default=500, help="logreg epochs")
    p.add_argument("--lr", type=float, default=0.1, help="logreg learning rate")
    p.add_argument("--l2", type=float, default=0.0, help="logreg L2 penalty")
    p.add_argument("--filter", choices=["none", "cosine", "euclidean"], default="none")
    p.add_argument("--fusion", choices=["mean", "median"], default="mean")
    p.add_argument("--mu", type=float, default=0.93, help="filter threshold")
    p.add_argument("--num-hands", type=int, choices=[1, 2], default=1)
    p.add_argument("--no-normalize", dest="normalize", action="store_false",
                   help="keep raw landmark coordinates instead of centering/scaling per hand")


def cmd_train_static(args) -> int:
    dataset = load_static_dataset(args.data)
    setting = parse_setting(args.setting)
    detector = replay_detector(dataset.store)

    by_label: dict[str, list[np.ndarray]] = {}
    for sid in dataset.store.sample_ids():
        label = dataset.labels.get(sid)
        if label is None:
            continue
        try:
            frame, _ = detect_with_augmentations(None, setting, detector, sid)
        except NoHandDetectedError:
            continue
        vec = strip_handedness(vectorize(frame, args.num_hands, args.normalize))
        by_label.setdefault(label, []).append(vec)
    if not by_label:
        raise GestureKitError("no sample had a detectable hand; nothing to train on")

    classes = make_classes(sorted(by_label))
    x = np.stack([v for c in classes for v in by_label[c.label]])
    y = [c for c in classes for _ in by_label[c.label]]
    clf = _classifier_config(args).build()
    clf.fit(x, y)

    filt = None
    fconf = _filter_config(args)
    if fconf is not None:
        filt = build_filter(
            {c: by_label[c.label] for c in classes},
            fusion=fconf.fusion, similarity=fconf.similarity, mu=fconf.mu,
        )

    model = StaticModel(
        classes=classes, classifier=clf, filter=filt,
        num_hands=args.num_hands, normalize=args.normalize,
    )
    save_static_model(model, args.out)
    print(f"trained {args.classifier} on {len(y)} vectors across {len(classes)} classes -> {args.out}")
    return 0


def cmd_eval_static(args) -> int:
    dataset = load_static_dataset(args.data)
    report = run_nshot(
        dataset,
        NShotPlan(n=args.n, repetitions=args.reps, seed=args.seed),
        parse_setting(args.setting),
        classifier=_classifier_config(args),
        filter_config=_filter_config(args),
        vectors=VectorConfig(num_hands=args.num_hands, normalize=args.normalize),
    )
    print(report.to_json(indent=2))
    return 0


def _load_dynamic_training(data_dir: Path):
    """Read labels.csv and one replay sequence file per sample.

    Optional start_shape / end_shape columns name the static shape classes;
    without them every gesture gets its own synthetic shape class, which is
    fine as long as no two gestures share a start shape.
    """
    labels_path = data_dir / "labels.csv"
    with open(labels_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "sample_id" not in fields or "class_label" not in fields:
            raise GestureKitError(f"{labels_path}: needs sample_id and class_label columns")
        rows = list(reader)
    samples = []
    for row in rows:
        sid, label = row["sample_id"], row["class_label"]
        path = data_dir / f"{sid}.jsonl"
        if not path.exists():
            raise GestureKitError(f"{path}: sequence file for sample {sid!r} not found")
        frames = sequence_from_store(load_replay(path))
        start = row.get("start_shape") or f"{label}:start"
        end = row.get("end_shape") or f"{label}:end"
        samples.append((sid, label, start, end, frames))
    return samples


def cmd_train_dynamic(args) -> int:
    samples = _load_dynamic_training(Path(args.data))
    if not samples:
        raise GestureKitError("no training samples found")

    # Shape classifier: first frames teach the start shapes, last frames the
    # end shapes (only needed when end shapes participate in matching).
    shape_vectors: dict[str, list[np.ndarray]] = {}
    for sid, label, start, end, frames in samples:
        present = [f for f in frames if not f.is_empty]
        if len(present) < 2:
            raise GestureKitError(f"sample {sid!r}: fewer than 2 frames with a detected hand")
        shape_vectors.setdefault(start, []).append(
            strip_handedness(vectorize(present[0], args.num_hands, args.normalize))
        )
        if args.use_end_shapes:
            shape_vectors.setdefault(end, []).append(
                strip_handedness(vectorize(present[-1], args.num_hands, args.normalize))
            )

    shape_classes = make_classes(sorted(shape_vectors))
    x = np.stack([v for c in shape_classes for v in shape_vectors[c.label]])
    y = [c for c in shape_classes for _ in shape_vectors[c.label]]
    shape_clf = KnnClassifier(k=min(args.shape_k, len(y)))
    shape_clf.fit(x, y)

    gesture_classes = make_classes(sorted({label for _, label, *_ in samples}))
    by_class = {c: [] for c in gesture_classes}
    by_label = {c.label: c for c in gesture_classes}
    for sid, label, *_rest, frames in samples:
        by_class[by_label[label]].append((sid, frames))

    model = fit_dynamic(
        by_class,
        k=args.keyframes,
        deadzone=args.deadzone,
        shape_classifier=shape_clf,
        num_hands=args.num_hands,
        normalize=args.normalize,
        z_weight=args.z_weight,
        use_end_shapes=args.use_end_shapes,
    )
    shape_model = StaticModel(
        classes=shape_classes, classifier=shape_clf,
        num_hands=args.num_hands, normalize=args.normalize,
    )
    save_dynamic_model(model, shape_model, args.out)
    print(f"fit {len(model.templates)} templates for {len(gesture_classes)} gestures -> {args.out}")
    return 0


def cmd_run_online(args) -> int:
    model, _ = load_dynamic_model(args.model)
    if args.stream == "-":
        frames = sequence_from_store(load_replay_lines(sys.stdin, source="<stdin>"))
    else:
        frames = sequence_from_store(load_replay(args.stream))
    engine = CandidateEngine(
        model,
        SpotterConfig(
            update_interval=args.update_interval,
            cooldown=args.cooldown,
            max_age=args.max_age,
        ),
    )
    for frame in frames:
        prediction = engine.process_frame(frame)
        if prediction is not None:
            print(f"{frame.frame_id}\t{prediction.label}")
    return 0


def cmd_augment_preview(args) -> int:
    bgr = cv2.imread(str(args.image), cv2.IMREAD_COLOR)
    if bgr is None:
        raise GestureKitError(f"{args.image}: not a readable image")
    img = Image(cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB))
    setting = parse_setting(args.setting)
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.image).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    for i, stage in enumerate(setting):
        staged = apply_stage(img, stage)
        path = out_dir / f"{stem}_stage{i}_db{stage.delta_b}_dr{stage.delta_r}.png"
        cv2.imwrite(str(path), cv2.cvtColor(staged.pixels, cv2.COLOR_RGB2BGR))
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gesturekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-static", parents=[], help="train a static gesture model from a replay dataset")
    p.add_argument("--data", required=True, help="directory with *.jsonl replay files and labels.csv")
    p.add_argument("--setting", default="1", help="augmentation setting: 1-4 or a JSON stage file")
    _add_classifier_args(p)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train_static)

    p = sub.add_parser("eval-static", help="n-shot evaluation; prints a JSON report")
    p.add_argument("--data", required=True)
    p.add_argument("--n", type=int, required=True, help="training samples per class")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--setting", default="1")
    _add_classifier_args(p)
    p.set_defaults(func=cmd_eval_static)

    p = sub.add_parser("train-dynamic", help="fit dynamic gesture templates from sequence files")
    p.add_argument("--data", required=True, help="directory with labels.csv and <sample_id>.jsonl sequences")
    p.add_argument("--keyframes", type=int, default=6)
    p.add_argument("--deadzone", type=float, default=0.15)
    p.add_argument("--z-weight", type=float, default=1.0, help="0 ignores the depth axis")
    p.add_argument("--use-end-shapes", action="store_true")
    p.add_argument("--shape-k", type=int, default=1, help="k of the start/end shape classifier")
    p.add_argument("--num-hands", type=int, choices=[1, 2], default=1)
    p.add_argument("--no-normalize", dest="normalize", action="store_false")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_dynamic)

    p = sub.add_parser("run-online", help="spot dynamic gestures in a frame stream")
    p.add_argument("--model", required=True)
    p.add_argument("--stream", required=True, help="replay sequence file, or - for stdin")
    p.add_argument("--update-interval", type=int, default=3)
    p.add_argument("--cooldown", type=int, default=0)
    p.add_argument("--max-age", type=int, default=90)
    p.set_defaults(func=cmd_run_online)

    p = sub.add_parser("augment-preview", help="write each augmented stage of an image to disk")
    p.add_argument("--image", required=True)
    p.add_argument("--setting", default="4")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_augment_preview)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GestureKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
