"""Detection retry loop and replayable detector backends.

The engine never talks to a landmark model directly: a detector is anything
with ``detect(image, key) -> LandmarkFrame``. The pipeline applies the
augmentation stages of a setting in order and keeps the first stage where a
hand was found. Pre-extracted detections can be replayed from a JSONL file
keyed by (sample_id, delta_b, delta_r), which makes every downstream stage
testable without a neural network.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Protocol

from .augment import AugmentationSetting, Image, apply_stage
from .errors import MissingContextError, NoHandDetectedError, ReplayFormatError
from .landmarks import Hand, Handedness, Landmark, LandmarkFrame, LANDMARKS_PER_HAND

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplayKey:
    """Identifies one detector invocation: which sample, under which stage."""

    sample_id: str
    delta_b: int = 0
    delta_r: int = 0


class Detector(Protocol):
    """Behavior contract for detector backends.

    Implementations must be deterministic (same input, same output) and safe
    to call concurrently. ``image`` may be None for backends that do not look
    at pixels (replay).
    """

    def detect(self, image: Image | None, key: ReplayKey | None = None) -> LandmarkFrame:
        ...


class ReplayStore:
    """In-memory map of replay keys to landmark frames.

    Lookup of an absent key yields the empty frame, mirroring a detector
    that simply found nothing. Sample ids are remembered in first-seen order.
    """

    def __init__(self, records: dict[ReplayKey, LandmarkFrame] | None = None):
        self._records: dict[ReplayKey, LandmarkFrame] = {}
        self._by_sample: dict[str, list[ReplayKey]] = {}
        for key, frame in (records or {}).items():
            self.put(key, frame)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, key: ReplayKey) -> bool:
        return key in self._records

    def get(self, key: ReplayKey) -> LandmarkFrame:
        frame = self._records.get(key)
        if frame is None:
            return LandmarkFrame.empty()
        return frame

    def put(self, key: ReplayKey, frame: LandmarkFrame) -> None:
        if key not in self._records:
            self._by_sample.setdefault(key.sample_id, []).append(key)
        self._records[key] = frame

    def sample_ids(self) -> list[str]:
        """Unique sample ids in first-seen order."""
        return list(self._by_sample)

    def keys_for(self, sample_id: str) -> list[ReplayKey]:
        """All stage keys recorded for one sample, in insertion order."""
        return list(self._by_sample.get(sample_id, ()))

    def items(self) -> Iterator[tuple[ReplayKey, LandmarkFrame]]:
        return iter(self._records.items())


class ReplayDetector:
    """Detector that ignores pixels and reads frames from a ReplayStore."""

    def __init__(self, store: ReplayStore):
        self._store = store

    def detect(self, image: Image | None, key: ReplayKey | None = None) -> LandmarkFrame:
        if key is None:
            raise MissingContextError("replay detection requires a ReplayKey")
        return self._store.get(key)


def replay_detector(store: ReplayStore) -> ReplayDetector:
    return ReplayDetector(store)


@dataclass(frozen=True)
class MockDetectorSpec:
    """Test oracle: detection outcome as a pure function of image statistics.

    A hand is "found" iff the presented image's mean value-channel level lies
    in ``accept_brightness`` (inclusive) and the stage rotation is in
    ``accept_rotation`` (None accepts any rotation). On success the detector
    emits ``emitted_frame`` verbatim.
    """

    emitted_frame: LandmarkFrame
    accept_brightness: tuple[float, float] = (0.0, 255.0)
    accept_rotation: frozenset[int] | None = None


class MockDetector:
    def __init__(self, spec: MockDetectorSpec):
        self.spec = spec

    def detect(self, image: Image | None, key: ReplayKey | None = None) -> LandmarkFrame:
        if image is None:
            raise ValueError("mock detection requires pixels")
        lo, hi = self.spec.accept_brightness
        if not (lo <= image.mean_value <= hi):
            return LandmarkFrame.empty()
        if self.spec.accept_rotation is not None:
            if key is None or key.delta_r not in self.spec.accept_rotation:
                return LandmarkFrame.empty()
        return self.spec.emitted_frame


def detect_with_augmentations(
    image: Image | None,
    setting: AugmentationSetting,
    detector: Detector,
    sample_id: str = "",
) -> tuple[LandmarkFrame, int]:
    """Run the detector over each augmentation stage in order.

    Returns the frame and stage index of the first stage whose detection is
    non-empty. Stages are keyed for the detector as (sample_id, delta_b,
    delta_r). When ``image`` is None, stages are not rendered (replay
    detectors never look at pixels).

    Raises:
        NoHandDetectedError: if every stage comes back empty.
    """
    for index, stage in enumerate(setting):
        key = ReplayKey(sample_id=sample_id, delta_b=stage.delta_b, delta_r=stage.delta_r)
        staged = apply_stage(image, stage) if image is not None else None
        frame = detector.detect(staged, key)
        if not frame.is_empty:
            return frame, index
    raise NoHandDetectedError(
        f"no hand detected in any of {len(setting)} augmentation stages"
        + (f" of sample {sample_id!r}" if sample_id else "")
    )


# --- replay file format ------------------------------------------------------
#
# One JSON object per line:
#   {"sample_id": str, "db": int, "dr": int,
#    "hands": [{"handedness": "Left"|"Right", "score": float,
#               "landmarks": [[x, y, z] * 21]}]}
# "hands": [] records an explicit detection miss.


def _parse_hand(obj: object, line_number: int) -> Hand:
    if not isinstance(obj, dict):
        raise ReplayFormatError(line_number, "hand entry must be an object")
    handedness = obj.get("handedness")
    if handedness not in ("Left", "Right"):
        raise ReplayFormatError(line_number, f"handedness must be 'Left' or 'Right', got {handedness!r}")
    score = obj.get("score", 1.0)
    if isinstance(score, bool) or not isinstance(score, (int, float)) or not math.isfinite(score):
        raise ReplayFormatError(line_number, f"score must be a finite number, got {score!r}")
    landmarks = obj.get("landmarks")
    if not isinstance(landmarks, list) or len(landmarks) != LANDMARKS_PER_HAND:
        count = len(landmarks) if isinstance(landmarks, list) else "missing"
        raise ReplayFormatError(line_number, f"expected {LANDMARKS_PER_HAND} landmarks, got {count}")
    points = []
    for triple in landmarks:
        if (
            not isinstance(triple, list)
            or len(triple) != 3
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in triple)
            or any(not math.isfinite(c) for c in triple)
        ):
            raise ReplayFormatError(line_number, f"landmark must be a finite [x, y, z] triple, got {triple!r}")
        points.append(Landmark(*map(float, triple)))
    return Hand(handedness=Handedness(handedness), landmarks=tuple(points), score=float(score))


def parse_replay_line(line: str, line_number: int) -> tuple[ReplayKey, LandmarkFrame]:
    """Parse one replay record; raises ReplayFormatError naming the line."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ReplayFormatError(line_number, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ReplayFormatError(line_number, "record must be a JSON object")

    sample_id = obj.get("sample_id")
    if not isinstance(sample_id, str) or not sample_id:
        raise ReplayFormatError(line_number, f"sample_id must be a non-empty string, got {sample_id!r}")
    db, dr = obj.get("db"), obj.get("dr")
    for name, val in (("db", db), ("dr", dr)):
        if isinstance(val, bool) or not isinstance(val, int):
            raise ReplayFormatError(line_number, f"{name} must be an integer, got {val!r}")
    hands = obj.get("hands")
    if not isinstance(hands, list) or len(hands) > 2:
        raise ReplayFormatError(line_number, "hands must be a list of at most 2 entries")

    parsed = [_parse_hand(h, line_number) for h in hands]
    key = ReplayKey(sample_id=sample_id, delta_b=db, delta_r=dr)
    # Detectors occasionally emit two same-handed hands; frame construction
    # keeps the higher-scoring one rather than rejecting the record.
    frame = LandmarkFrame.from_detections(frame_id=0, hands=parsed)
    return key, frame


def load_replay_lines(lines: Iterable[str], source: str = "<stream>") -> ReplayStore:
    """Parse replay JSONL records from an iterable of lines.

    Blank lines are skipped. A duplicated key keeps the last record and logs
    a warning. Malformed records raise ReplayFormatError with the line number.
    """
    store = ReplayStore()
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        key, frame = parse_replay_line(line, line_number)
        if key in store:
            logger.warning("%s:%d: duplicate replay key %s; keeping the later record", source, line_number, key)
        store.put(key, frame)
    return store


def load_replay(path: str | Path) -> ReplayStore:
    """Load a replay JSONL file; see :func:`load_replay_lines`."""
    with open(path, "r", encoding="utf-8") as fh:
        return load_replay_lines(fh, source=str(path))


def replay_record(key: ReplayKey, frame: LandmarkFrame) -> str:
    """Serialize one (key, frame) pair to a replay JSON line."""
    hands = [
        {
            "handedness": hand.handedness.value,
            "score": hand.score,
            "landmarks": [[p.x, p.y, p.z] for p in hand.landmarks],
        }
        for hand in frame.hands
    ]
    return json.dumps(
        {"sample_id": key.sample_id, "db": key.delta_b, "dr": key.delta_r, "hands": hands}
    )


def save_replay(store: ReplayStore, path: str | Path) -> None:
    """Write a store back out as replay JSONL (insertion order)."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, frame in store.items():
            fh.write(replay_record(key, frame) + "\n")


def sequence_from_store(store: ReplayStore) -> list[LandmarkFrame]:
    """Collapse a replay store into an ordered frame sequence.

    Each distinct sample_id is one camera frame; when several stages were
    recorded for a frame, the first non-empty one in file order wins (the
    extractor writes stages in setting order, so this is first-success
    selection). Frame ids parse from the sample_id when it is numeric,
    otherwise frames are numbered by position.
    """
    frames: list[LandmarkFrame] = []
    for position, sample_id in enumerate(store.sample_ids()):
        chosen: LandmarkFrame | None = None
        for key in store.keys_for(sample_id):
            frame = store.get(key)
            if not frame.is_empty:
                chosen = frame
                break
        try:
            frame_id = int(sample_id)
        except ValueError:
            frame_id = position
        if chosen is None:
            frames.append(LandmarkFrame.empty(frame_id=frame_id))
        else:
            frames.append(LandmarkFrame(frame_id=frame_id, hands=chosen.hands))
    return frames


def load_sequence(path: str | Path) -> list[LandmarkFrame]:
    """Load an ordered frame sequence from a replay file."""
    return sequence_from_store(load_replay(path))
