"""Online dynamic-gesture spotting without start/end markers.

The stream is never segmented. Instead, whenever the current hand shape
matches the starting shape of any known gesture, a *candidate* for that
gesture is opened. Each processed frame, the hand's displacement from a
candidate's anchor is quantized: matching the next expected direction
advances the candidate, staying inside the deadzone keeps it, anything
else kills it. A candidate that walks through its whole direction code
(and, when defined, shows the right end shape) fires a prediction and
clears the field.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .classify import ClassId, StaticClassifier
from .errors import DegenerateTrajectoryError
from .filtering import RepresentativeSet, passes_filter
from .landmarks import LandmarkFrame, strip_handedness, vectorize
from .trajectory import (
    QuantizedTrajectory,
    STATIONARY,
    centroid_trajectory,
    encode_with_scale,
    quantize_step,
)

TrainingSample = tuple[str, Sequence[LandmarkFrame]]


@dataclass(frozen=True)
class GestureTemplate:
    """One learned dynamic gesture: start shape, direction code, end shape.

    step_scale is the mean keyframe step length of the training sample; the
    deadzone at inference is relative to it.
    """

    gesture: ClassId
    start_shape: ClassId
    trajectory: QuantizedTrajectory
    step_scale: float
    end_shape: ClassId | None = None

    def __post_init__(self):
        if len(self.trajectory) == 0:
            raise ValueError("a template needs a non-empty trajectory")
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")


@dataclass(frozen=True)
class Candidate:
    """A live hypothesis that one template is currently being performed."""

    template: GestureTemplate
    progress: int
    anchor: tuple[float, float, float]
    created_step: int

    @property
    def trajectory_done(self) -> bool:
        return self.progress >= len(self.template.trajectory)


@dataclass(frozen=True)
class SpotterConfig:
    """Inference-time knobs for the candidate engine."""

    update_interval: int = 3
    max_age: int = 90
    cooldown: int = 0
    start_filter: RepresentativeSet | None = None

    def __post_init__(self):
        if self.update_interval < 1:
            raise ValueError("update_interval must be >= 1")
        if self.max_age < 1:
            raise ValueError("max_age must be >= 1")
        if self.cooldown < 0:
            raise ValueError("cooldown must be >= 0")


@dataclass(frozen=True)
class DynamicModel:
    """Everything needed to spot gestures in a stream."""

    templates: tuple[GestureTemplate, ...]
    shape_classifier: StaticClassifier
    deadzone: float
    keyframes: int
    num_hands: int = 1
    normalize: bool = True
    z_weight: float = 1.0
    flip_y: bool = True


@dataclass(frozen=True)
class SpotterState:
    """Snapshot of the engine between frames; all contents are immutable."""

    candidates: tuple[Candidate, ...] = ()
    step_count: int = 0
    cooldown_remaining: int = 0


def _hand_position(frame: LandmarkFrame, model: DynamicModel) -> tuple[float, float, float]:
    cx, cy, cz = frame.primary_hand.centroid
    y = -cy if model.flip_y else cy
    return (float(cx), float(y), float(cz * model.z_weight))


def _shape_vector(frame: LandmarkFrame, model: DynamicModel) -> np.ndarray:
    return strip_handedness(vectorize(frame, model.num_hands, model.normalize))


def candidate_step(
    state: SpotterState,
    frame: LandmarkFrame,
    model: DynamicModel,
    config: SpotterConfig,
) -> tuple[SpotterState, ClassId | None]:
    """Advance the candidate machine by one processed frame.

    Spawns a candidate for every template whose start shape matches the
    current hand shape, updates each candidate against the hand's motion,
    and fires at most one prediction. A prediction clears every candidate.
    Empty frames only age the field.
    """
    step = state.step_count + 1
    cooldown = max(0, state.cooldown_remaining - 1)
    suppressed = state.cooldown_remaining > 0

    live = [c for c in state.candidates if step - c.created_step <= config.max_age]

    if frame.is_empty:
        return SpotterState(tuple(live), step, cooldown), None

    pos = _hand_position(frame, model)
    shape: ClassId | None = None
    if not suppressed or any(c.trajectory_done for c in live):
        vec = _shape_vector(frame, model)
        if config.start_filter is None or passes_filter(vec, config.start_filter):
            shape = model.shape_classifier.predict(vec)

    if shape is not None and not suppressed:
        # One pending (progress 0) candidate per template is enough: a second
        # one could only differ by a sub-deadzone anchor shift.
        pending = {c.template for c in live if c.progress == 0}
        for template in model.templates:
            if template.start_shape.index == shape.index and template not in pending:
                live.append(Candidate(template, 0, pos, step))

    updated: list[Candidate] = []
    completed: Candidate | None = None
    for cand in live:
        move = quantize_step(np.array(cand.anchor), np.array(pos), model.deadzone, cand.template.step_scale)
        if cand.trajectory_done:
            # Trajectory finished but the end shape has not shown yet; wait
            # in place, any further motion kills the hypothesis.
            if move != STATIONARY:
                continue
            nxt = cand
        elif move == cand.template.trajectory.steps[cand.progress]:
            nxt = replace(cand, progress=cand.progress + 1, anchor=pos)
        elif move == STATIONARY:
            nxt = cand
        else:
            continue

        if completed is None and nxt.trajectory_done and _end_shape_ok(nxt.template, shape):
            completed = nxt
            continue
        updated.append(nxt)

    if completed is not None:
        return SpotterState((), step, config.cooldown), completed.template.gesture
    return SpotterState(tuple(updated), step, cooldown), None


def _end_shape_ok(template: GestureTemplate, shape: ClassId | None) -> bool:
    if template.end_shape is None:
        return True
    return shape is not None and shape.index == template.end_shape.index


class CandidateEngine:
    """Stateful convenience wrapper around :func:`candidate_step`.

    Feed every camera frame to :meth:`process_frame`; only every
    update_interval-th one is actually processed.
    """

    def __init__(self, model: DynamicModel, config: SpotterConfig | None = None):
        self.model = model
        self.config = config or SpotterConfig()
        self._state = SpotterState()
        self._frames_seen = 0

    @property
    def state(self) -> SpotterState:
        return self._state

    def reset(self) -> None:
        self._state = SpotterState()
        self._frames_seen = 0

    def step(self, frame: LandmarkFrame) -> ClassId | None:
        """Process one frame unconditionally."""
        self._state, prediction = candidate_step(self._state, frame, self.model, self.config)
        return prediction

    def process_frame(self, frame: LandmarkFrame) -> ClassId | None:
        """Process every update_interval-th camera frame, skip the rest."""
        index = self._frames_seen
        self._frames_seen += 1
        if index % self.config.update_interval != 0:
            return None
        return self.step(frame)


def fit_dynamic(
    training: Mapping[ClassId, Sequence[TrainingSample]],
    k: int,
    deadzone: float,
    shape_classifier: StaticClassifier,
    *,
    num_hands: int = 1,
    normalize: bool = True,
    z_weight: float = 1.0,
    flip_y: bool = True,
    use_end_shapes: bool = False,
) -> DynamicModel:
    """Learn gesture templates from labeled frame sequences.

    Each training sample contributes one template: the classified shape of
    its first frame, the quantized direction code of its centroid track, and
    (with use_end_shapes) the classified shape of its last frame. Samples of
    one class that encode identically collapse into a single template, so a
    single sample per class is enough.

    Raises:
        DegenerateTrajectoryError: a sample's hand never moved (named).
    """
    templates: list[GestureTemplate] = []
    seen: set[tuple] = set()
    for gesture in sorted(training, key=lambda c: c.index):
        for sample_id, frames in training[gesture]:
            present = [f for f in frames if not f.is_empty]
            points = centroid_trajectory(frames, flip_y=flip_y)
            if len(points) < 2:
                raise DegenerateTrajectoryError(
                    f"sample {sample_id!r} of class {gesture.label!r} has fewer than 2 frames with a hand"
                )
            try:
                trajectory, scale = encode_with_scale(points, k, deadzone, z_weight)
            except DegenerateTrajectoryError as exc:
                raise DegenerateTrajectoryError(
                    f"sample {sample_id!r} of class {gesture.label!r}: {exc}"
                ) from exc

            start_shape = shape_classifier.predict(_shape_vec(present[0], num_hands, normalize))
            end_shape = None
            if use_end_shapes:
                end_shape = shape_classifier.predict(_shape_vec(present[-1], num_hands, normalize))

            key = (
                gesture.index,
                start_shape.index,
                trajectory.steps,
                end_shape.index if end_shape else None,
            )
            if key in seen:
                continue
            seen.add(key)
            templates.append(
                GestureTemplate(
                    gesture=gesture,
                    start_shape=start_shape,
                    trajectory=trajectory,
                    step_scale=scale,
                    end_shape=end_shape,
                )
            )

    return DynamicModel(
        templates=tuple(templates),
        shape_classifier=shape_classifier,
        deadzone=deadzone,
        keyframes=k,
        num_hands=num_hands,
        normalize=normalize,
        z_weight=z_weight,
        flip_y=flip_y,
    )


def _shape_vec(frame: LandmarkFrame, num_hands: int, normalize: bool) -> np.ndarray:
    return strip_handedness(vectorize(frame, num_hands, normalize))
