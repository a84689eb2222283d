"""Batch extraction: images or video through augmentation stages to replay JSONL.

Every (sample, stage) pair produces exactly one output line, including an
explicit ``"hands": []`` line when the detector found nothing, so the
downstream engine can tell "tried and missed" from "never tried". Landmarks
detected on rotated stages are mapped back into the unrotated frame's
coordinate system: hand shapes survive rotation, but trajectories only make
sense in one fixed frame.

Output line schema (the contract with the gesturekit engine):
  {"sample_id": str, "db": int, "dr": int,
   "hands": [{"handedness": "Left"|"Right", "score": float,
              "landmarks": [[x, y, z] * 21]}]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from gesturekit import AugmentationSetting, Image, apply_stage, builtin_setting
from gesturekit.augment import rotation_matrix

from .backends import Extractor, HandDetection

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}
VIDEO_SUFFIXES = {".mp4", ".avi", ".mov", ".mkv", ".webm"}


@dataclass(frozen=True)
class ExtractionJob:
    """What to extract: input images or video, stages, hands, output path."""

    input_path: Path
    setting: AugmentationSetting
    output_path: Path
    num_hands: int = 1

    def __post_init__(self):
        if self.num_hands not in (1, 2):
            raise ValueError("num_hands must be 1 or 2")


@dataclass
class ExtractionReport:
    """What happened: counts plus per-file errors (unreadable inputs)."""

    samples: int = 0
    lines: int = 0
    detections: int = 0
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def derotate_landmarks(
    landmarks: np.ndarray, delta_r: int, original_size: tuple[int, int], staged_size: tuple[int, int]
) -> np.ndarray:
    """Map normalized landmarks from a rotated canvas back to the source frame.

    x/y are normalized by (dimension - 1) on both sides; z is untouched.
    Points may leave [0, 1] when the hand sat in a corner that rotation
    clipped into view; that is fine downstream.
    """
    if delta_r % 360 == 0:
        return landmarks
    w0, h0 = original_size
    ws, hs = staged_size
    forward = rotation_matrix(w0, h0, delta_r)
    inverse = cv2.invertAffineTransform(forward)
    out = landmarks.copy()
    px = landmarks[:, 0] * max(ws - 1, 1)
    py = landmarks[:, 1] * max(hs - 1, 1)
    ones = np.ones_like(px)
    mapped = inverse @ np.stack([px, py, ones])
    out[:, 0] = mapped[0] / max(w0 - 1, 1)
    out[:, 1] = mapped[1] / max(h0 - 1, 1)
    return out


def _hand_to_json(hand: HandDetection) -> dict:
    return {
        "handedness": hand.handedness,
        "score": hand.score,
        "landmarks": [[float(x), float(y), float(z)] for x, y, z in hand.landmarks],
    }


def extract_sample(
    sample_id: str,
    rgb: np.ndarray,
    setting: AugmentationSetting,
    extractor: Extractor,
    num_hands: int,
) -> list[str]:
    """One replay line per stage for a single image, in stage order."""
    image = Image(rgb)
    lines = []
    for stage in setting:
        staged = apply_stage(image, stage)
        detections = extractor.detect(staged.pixels, num_hands)
        hands = [
            _hand_to_json(
                HandDetection(
                    handedness=d.handedness,
                    score=d.score,
                    landmarks=derotate_landmarks(
                        d.landmarks,
                        stage.delta_r,
                        (image.width, image.height),
                        (staged.width, staged.height),
                    ),
                )
            )
            for d in detections
        ]
        lines.append(
            json.dumps(
                {"sample_id": sample_id, "db": stage.delta_b, "dr": stage.delta_r, "hands": hands}
            )
        )
    return lines


def _iter_image_dir(directory: Path):
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    for path in files:
        bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
        rgb = None if bgr is None else cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
        yield path.stem, rgb, str(path)


def _iter_video(path: Path):
    capture = cv2.VideoCapture(str(path))
    if not capture.isOpened():
        yield "000000", None, str(path)
        return
    index = 0
    while True:
        ok, bgr = capture.read()
        if not ok:
            break
        yield f"{index:06d}", cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB), str(path)
        index += 1
    capture.release()


def run_extraction(job: ExtractionJob, extractor: Extractor) -> ExtractionReport:
    """Extract a whole job and write the replay file.

    Unreadable inputs are reported in the per-file error list and skipped;
    everything readable is still extracted. Output lines are ordered by
    (sample_id, stage index).
    """
    report = ExtractionReport()
    if job.input_path.is_dir():
        source = _iter_image_dir(job.input_path)
    elif job.input_path.suffix.lower() in VIDEO_SUFFIXES:
        source = _iter_video(job.input_path)
    elif job.input_path.is_file():
        source = _iter_image_dir_single(job.input_path)
    else:
        raise FileNotFoundError(f"{job.input_path}: no such file or directory")

    all_lines: list[tuple[str, list[str]]] = []
    for sample_id, rgb, origin in source:
        if rgb is None:
            report.errors.append(f"{origin}: unreadable input")
            continue
        lines = extract_sample(sample_id, rgb, job.setting, extractor, job.num_hands)
        report.samples += 1
        report.detections += sum(1 for line in lines if json.loads(line)["hands"])
        all_lines.append((sample_id, lines))

    all_lines.sort(key=lambda item: item[0])
    with open(job.output_path, "w", encoding="utf-8") as fh:
        for _, lines in all_lines:
            for line in lines:
                fh.write(line + "\n")
                report.lines += 1
    return report


def _iter_image_dir_single(path: Path):
    bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
    rgb = None if bgr is None else cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    yield path.stem, rgb, str(path)


def parse_setting_arg(value: str) -> AugmentationSetting:
    """A built-in id 1-4 or a JSON file with [delta_b, delta_r] stages."""
    if value.isdigit():
        return builtin_setting(int(value))
    doc = json.loads(Path(value).read_text(encoding="utf-8"))
    stages = doc["stages"] if isinstance(doc, dict) else doc
    return AugmentationSetting(tuple((int(b), int(r)) for b, r in stages))
