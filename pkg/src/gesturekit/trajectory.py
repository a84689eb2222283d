"""Hand-trajectory encoding: outlier removal, keyframes, direction signs.

A raw centroid track is noisy and of arbitrary length. It is reduced to a
fixed-length code in three steps: drop single-frame position spikes, pick k
keyframes that evenly split the cumulative path length, then quantize each
keyframe-to-keyframe displacement into per-axis signs (+/0/-). The sign
code generalizes the movement enough that one sample per gesture suffices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateTrajectoryError
from .landmarks import LandmarkFrame


@dataclass(frozen=True)
class TrajectoryPoint:
    """Hand position (centroid) at one frame."""

    x: float
    y: float
    z: float
    frame_id: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError("trajectory coordinates must be finite")

    @property
    def pos(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class Direction:
    """Per-axis movement sign: +1, 0 (stationary), or -1 for x, y, z."""

    dx: int
    dy: int
    dz: int

    def __post_init__(self):
        for d in (self.dx, self.dy, self.dz):
            if d not in (-1, 0, 1):
                raise ValueError(f"axis sign must be -1, 0 or +1, got {d}")

    def __str__(self) -> str:
        sym = {1: "+", 0: "0", -1: "-"}
        return f"({sym[self.dx]},{sym[self.dy]},{sym[self.dz]})"


STATIONARY = Direction(0, 0, 0)


@dataclass(frozen=True)
class QuantizedTrajectory:
    """Ordered direction steps; k keyframes yield k-1 steps."""

    steps: tuple[Direction, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __str__(self) -> str:
        return "(" + ", ".join(str(s) for s in self.steps) + ")"


def point_distance(a: TrajectoryPoint, b: TrajectoryPoint, z_weight: float = 1.0) -> float:
    """Euclidean distance on (x, y, z * z_weight); z_weight=0 ignores depth."""
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + ((a.z - b.z) * z_weight) ** 2)


def remove_outliers(
    points: Sequence[TrajectoryPoint], z_weight: float = 1.0
) -> list[TrajectoryPoint]:
    """Drop single-point spikes in one left-to-right pass.

    An interior point is a spike when its surviving predecessor and its
    successor are closer to each other than either is to the point itself,
    i.e. the trajectory jumped away and immediately back. The first and last
    points always survive.
    """
    if len(points) <= 2:
        return list(points)
    kept = [points[0]]
    for i in range(1, len(points) - 1):
        prev, cur, nxt = kept[-1], points[i], points[i + 1]
        skip = point_distance(prev, nxt, z_weight) < min(
            point_distance(prev, cur, z_weight), point_distance(cur, nxt, z_weight)
        )
        if not skip:
            kept.append(cur)
    kept.append(points[-1])
    return kept


def _cumulative_arc(points: Sequence[TrajectoryPoint], z_weight: float) -> np.ndarray:
    cum = np.zeros(len(points))
    for i in range(1, len(points)):
        cum[i] = cum[i - 1] + point_distance(points[i - 1], points[i], z_weight)
    return cum


def extract_keyframes(
    points: Sequence[TrajectoryPoint], k: int, z_weight: float = 1.0
) -> list[TrajectoryPoint]:
    """Select k keyframes that evenly split the cumulative path length.

    The first and last points are always keyframes; each interior target
    arc position j*D/(k-1) takes the input point whose cumulative arc length
    is nearest (ties to the earlier point). When several targets land on the
    same point (the path has too few distinct positions), the duplicates
    collapse and fewer than k keyframes come back.

    Raises:
        DegenerateTrajectoryError: total path length is zero.
    """
    if k < 2:
        raise ValueError("at least 2 keyframes required")
    if len(points) < 2:
        raise DegenerateTrajectoryError("need at least 2 trajectory points")
    cum = _cumulative_arc(points, z_weight)
    total = float(cum[-1])
    if total == 0.0:
        raise DegenerateTrajectoryError("the hand never moved")

    indices = [0]
    for j in range(1, k - 1):
        target = total * j / (k - 1)
        right = int(np.searchsorted(cum, target, side="left"))
        if right == 0:
            idx = 0
        else:
            left = right - 1
            idx = left if target - cum[left] <= cum[right] - target else right
        indices.append(idx)
    indices.append(len(points) - 1)

    deduped = [indices[0]]
    for idx in indices[1:]:
        if idx != deduped[-1]:
            deduped.append(idx)
    return [points[i] for i in deduped]


def quantize_step(
    frm: np.ndarray | TrajectoryPoint,
    to: np.ndarray | TrajectoryPoint,
    deadzone: float,
    scale: float = 1.0,
) -> Direction:
    """Quantize a displacement into per-axis signs.

    An axis counts as moving only when its displacement magnitude exceeds
    deadzone * scale; scale is the calibration step length (a template's mean
    keyframe step), which makes the deadzone relative to gesture size.
    """
    if deadzone <= 0:
        raise ValueError("deadzone must be positive")
    a = frm.pos if isinstance(frm, TrajectoryPoint) else np.asarray(frm, dtype=np.float64)
    b = to.pos if isinstance(to, TrajectoryPoint) else np.asarray(to, dtype=np.float64)
    threshold = deadzone * scale
    delta = b - a
    signs = [0 if abs(d) <= threshold else (1 if d > 0 else -1) for d in delta]
    return Direction(*signs)


def mean_step_length(keyframes: Sequence[TrajectoryPoint], z_weight: float = 1.0) -> float:
    """Mean Euclidean distance between consecutive keyframes."""
    gaps = [point_distance(a, b, z_weight) for a, b in zip(keyframes, keyframes[1:])]
    return float(np.mean(gaps))


def encode_with_scale(
    points: Sequence[TrajectoryPoint],
    k: int,
    deadzone: float,
    z_weight: float = 1.0,
) -> tuple[QuantizedTrajectory, float]:
    """Full encoding pipeline, also returning the calibration step length."""
    cleaned = remove_outliers(points, z_weight)
    keyframes = extract_keyframes(cleaned, k, z_weight)
    scale = mean_step_length(keyframes, z_weight)
    steps = []
    for a, b in zip(keyframes, keyframes[1:]):
        delta = np.array([b.x - a.x, b.y - a.y, (b.z - a.z) * z_weight])
        steps.append(quantize_step(np.zeros(3), delta, deadzone, scale))
    return QuantizedTrajectory(tuple(steps)), scale


def encode_trajectory(
    points: Sequence[TrajectoryPoint],
    k: int,
    deadzone: float,
    z_weight: float = 1.0,
) -> QuantizedTrajectory:
    """Outlier removal, keyframe extraction, then per-step quantization.

    k keyframes give k-1 direction steps (fewer if keyframes collapsed).
    """
    encoded, _ = encode_with_scale(points, k, deadzone, z_weight)
    return encoded


def centroid_trajectory(
    frames: Sequence[LandmarkFrame], flip_y: bool = True
) -> list[TrajectoryPoint]:
    """Hand-centroid track of a frame sequence; empty frames are skipped.

    Detectors report y growing downward; flip_y negates it so a positive
    y step means the hand moved up.
    """
    points = []
    for frame in frames:
        if frame.is_empty:
            continue
        cx, cy, cz = frame.primary_hand.centroid
        points.append(
            TrajectoryPoint(float(cx), float(-cy if flip_y else cy), float(cz), frame.frame_id)
        )
    return points
