"""Data model for hand landmarks and their fixed-layout feature vectors.

A detector reports per hand 21 keypoints with x/y/z coordinates plus a
handedness label. Frames of 0-2 hands are flattened into a fixed-length
feature vector whose layout is independent of which hands were actually
found: missing hands are zero-filled and their handedness slot is -1, so
a classifier always sees the same dimensionality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import EmptyFrameError

LANDMARKS_PER_HAND = 21
COORDS_PER_HAND = 3 * LANDMARKS_PER_HAND  # 63


class Handedness(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"

    @property
    def code(self) -> float:
        """Numeric encoding used in the handedness slot (missing hands get -1)."""
        return 0.0 if self is Handedness.LEFT else 1.0


@dataclass(frozen=True)
class Landmark:
    """One keypoint. z shares the unit of x and y; the scale is detector-dependent."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"landmark coordinates must be finite, got {(self.x, self.y, self.z)}")


@dataclass(frozen=True)
class Hand:
    """A detected hand: exactly 21 landmarks plus a handedness label.

    ``score`` is the detector's confidence; it breaks ties when a detector
    reports two hands with the same handedness.
    """

    handedness: Handedness
    landmarks: tuple[Landmark, ...]
    score: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "landmarks", tuple(self.landmarks))
        if len(self.landmarks) != LANDMARKS_PER_HAND:
            raise ValueError(f"a hand has exactly {LANDMARKS_PER_HAND} landmarks, got {len(self.landmarks)}")

    @cached_property
    def coords(self) -> np.ndarray:
        """Landmark coordinates as a read-only (21, 3) float array."""
        arr = np.array([(p.x, p.y, p.z) for p in self.landmarks], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def centroid(self) -> np.ndarray:
        """Arithmetic mean of the 21 landmarks, shape (3,)."""
        c = self.coords.mean(axis=0)
        c.flags.writeable = False
        return c


@dataclass(frozen=True)
class LandmarkFrame:
    """One detector result: 0-2 hands, at most one per handedness.

    An empty ``hands`` tuple represents "no hand detected".
    """

    frame_id: int
    hands: tuple[Hand, ...] = ()
    timestamp: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "hands", tuple(self.hands))
        if self.frame_id < 0:
            raise ValueError("frame_id must be non-negative")
        seen = [h.handedness for h in self.hands]
        if len(seen) != len(set(seen)):
            raise ValueError("a frame may contain at most one hand per handedness")

    @classmethod
    def empty(cls, frame_id: int = 0, timestamp: float | None = None) -> "LandmarkFrame":
        return cls(frame_id=frame_id, hands=(), timestamp=timestamp)

    @classmethod
    def from_detections(
        cls,
        frame_id: int,
        hands: Iterable[Hand],
        timestamp: float | None = None,
    ) -> "LandmarkFrame":
        """Build a frame from raw detector output.

        Real detectors occasionally report two hands with the same handedness;
        only the highest-scoring one per handedness is kept. Hands are stored
        in Left-then-Right order.
        """
        best: dict[Handedness, Hand] = {}
        for hand in hands:
            cur = best.get(hand.handedness)
            if cur is None or hand.score > cur.score:
                best[hand.handedness] = hand
        ordered = sorted(best.values(), key=lambda h: h.handedness.value != "Left")
        return cls(frame_id=frame_id, hands=tuple(ordered), timestamp=timestamp)

    @property
    def is_empty(self) -> bool:
        return len(self.hands) == 0

    def hand(self, handedness: Handedness) -> Hand | None:
        for h in self.hands:
            if h.handedness is handedness:
                return h
        return None

    @property
    def primary_hand(self) -> Hand:
        """The single hand this frame is "about" when only one is wanted.

        Highest detector score wins; on a tie the left hand is chosen for
        determinism.
        """
        if self.is_empty:
            raise EmptyFrameError("frame contains no hands")
        return max(self.hands, key=lambda h: (h.score, h.handedness is Handedness.LEFT))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Fixed-layout flattening of a frame: length 21*3*num_hands + num_hands.

    Layout: left-hand 63 coordinates, then (for num_hands=2) right-hand 63
    coordinates, then one handedness slot per hand. A missing hand's
    coordinates are all 0 and its handedness slot is -1.
    """

    values: np.ndarray
    num_hands: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        if self.num_hands not in (1, 2):
            raise ValueError("num_hands must be 1 or 2")
        expected = COORDS_PER_HAND * self.num_hands + self.num_hands
        if arr.shape != (expected,):
            raise ValueError(f"expected vector of length {expected}, got shape {arr.shape}")

    def __len__(self) -> int:
        return len(self.values)


def normalize_coords(coords: np.ndarray) -> np.ndarray:
    """Translate landmarks to their centroid and scale the farthest one to radius 1.

    Makes the representation invariant to where the hand sits in the image and
    how large it appears. A fully degenerate hand (all 21 landmarks identical)
    is only centered, since it has no radius to scale by.
    """
    centered = coords - coords.mean(axis=0)
    radius = float(np.linalg.norm(centered, axis=1).max())
    if radius > 0.0:
        centered = centered / radius
    return centered


def vectorize(frame: LandmarkFrame, num_hands: int, normalize: bool = False) -> FeatureVector:
    """Flatten a frame into the fixed feature-vector layout.

    Args:
        frame: detector result with at least one hand.
        num_hands: how many hand slots the vector has (1 or 2).
        normalize: center each present hand on its centroid and scale by the
            maximum landmark distance from it.

    For num_hands=2 the slots are keyed by handedness (left first). For
    num_hands=1 the single slot takes the frame's primary hand. Handedness
    slots encode Left=0, Right=1, missing=-1.

    Raises:
        EmptyFrameError: if the frame contains no hands.
    """
    if frame.is_empty:
        raise EmptyFrameError("cannot vectorize a frame with no hands")
    if num_hands not in (1, 2):
        raise ValueError("num_hands must be 1 or 2")

    values = np.zeros(COORDS_PER_HAND * num_hands + num_hands, dtype=np.float64)
    values[COORDS_PER_HAND * num_hands:] = -1.0

    if num_hands == 2:
        slotted = [(0, frame.hand(Handedness.LEFT)), (1, frame.hand(Handedness.RIGHT))]
    else:
        slotted = [(0, frame.primary_hand)]

    for slot, hand in slotted:
        if hand is None:
            continue
        coords = hand.coords
        if normalize:
            coords = normalize_coords(coords)
        values[slot * COORDS_PER_HAND:(slot + 1) * COORDS_PER_HAND] = coords.ravel()
        values[COORDS_PER_HAND * num_hands + slot] = hand.handedness.code

    return FeatureVector(values=values, num_hands=num_hands)


def strip_handedness(vector: FeatureVector) -> np.ndarray:
    """Drop the trailing handedness slots, keeping the 63*num_hands coordinates.

    This is the form classifiers consume: the handedness encoding lives on a
    different scale than the coordinates and would dominate distance metrics.
    """
    return vector.values[:COORDS_PER_HAND * vector.num_hands].copy()
