"""Hand-landmark extractor backends.

An extractor is anything with ``detect(rgb, num_hands) -> list[HandDetection]``
returning landmarks in normalized image coordinates (x, y in [0, 1] of the
presented image, z in the model's native depth unit). The real backend wraps
MediaPipe Hands when the package is installed; the synthetic backend is a
deterministic stand-in for exercising the extraction pipeline without a model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np


@dataclass(frozen=True)
class HandDetection:
    """One detected hand: handedness label, confidence, (21, 3) landmarks."""

    handedness: str  # "Left" | "Right"
    score: float
    landmarks: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.landmarks, dtype=np.float64)
        if arr.shape != (21, 3):
            raise ValueError(f"expected (21, 3) landmarks, got {arr.shape}")
        object.__setattr__(self, "landmarks", arr)


class Extractor(Protocol):
    def detect(self, rgb: np.ndarray, num_hands: int) -> list[HandDetection]:
        ...


class SyntheticExtractor:
    """Deterministic fake detector for tests and dry runs.

    "Detects" one right hand when the image's mean brightness (max of the
    RGB channels) reaches ``min_mean_value``; the landmarks form a small
    grid centered on the brightest pixel, so geometric post-processing
    (e.g. de-rotation) is observable.
    """

    def __init__(self, min_mean_value: float = 100.0, span: float = 0.05):
        self.min_mean_value = min_mean_value
        self.span = span

    def detect(self, rgb: np.ndarray, num_hands: int) -> list[HandDetection]:
        value = rgb.max(axis=2)
        if float(value.mean()) < self.min_mean_value:
            return []
        h, w = value.shape
        flat = int(value.argmax())
        cy, cx = divmod(flat, w)
        center = np.array([cx / max(w - 1, 1), cy / max(h - 1, 1), 0.0])
        grid = np.stack(
            [
                np.tile(np.linspace(-1.0, 1.0, 7), 3),
                np.repeat(np.linspace(-1.0, 1.0, 3), 7),
                np.zeros(21),
            ],
            axis=1,
        )
        landmarks = center + grid * self.span
        return [HandDetection(handedness="Right", score=0.9, landmarks=landmarks)][:num_hands]


class MediaPipeExtractor:
    """Wraps MediaPipe Hands in static-image mode."""

    def __init__(self, num_hands: int = 2, min_detection_confidence: float = 0.5):
        import mediapipe as mp  # deferred: optional dependency

        self._hands = mp.solutions.hands.Hands(
            static_image_mode=True,
            max_num_hands=num_hands,
            min_detection_confidence=min_detection_confidence,
        )

    def detect(self, rgb: np.ndarray, num_hands: int) -> list[HandDetection]:
        result = self._hands.process(rgb)
        if not result.multi_hand_landmarks:
            return []
        detections = []
        for hand_landmarks, handedness in zip(result.multi_hand_landmarks, result.multi_handedness):
            label = handedness.classification[0].label
            score = float(handedness.classification[0].score)
            points = np.array([[p.x, p.y, p.z] for p in hand_landmarks.landmark])
            detections.append(HandDetection(handedness=label, score=score, landmarks=points))
        return detections[:num_hands]


def create_extractor(backend: str, num_hands: int) -> Extractor:
    if backend == "synthetic":
        return SyntheticExtractor()
    if backend == "mediapipe":
        try:
            return MediaPipeExtractor(num_hands=num_hands)
        except ImportError as exc:
            raise RuntimeError(
                "the mediapipe backend needs the 'mediapipe' package "
                "(pip install gesturekit-adapter[mediapipe])"
            ) from exc
    raise ValueError(f"unknown backend {backend!r}")
