"""Shared synthetic-data builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from gesturekit import Hand, Handedness, Image, Landmark, LandmarkFrame


def shape_offsets(shape_id: int) -> np.ndarray:
    """A reproducible 21-landmark constellation, centered on its mean.

    Different shape_ids give well-separated constellations, standing in for
    distinct static hand shapes. The mean offset is zero, so a hand built
    from these has its centroid exactly at the requested center.
    """
    rng = np.random.Generator(np.random.PCG64(1000 + shape_id))
    offsets = rng.uniform(-1.0, 1.0, size=(21, 3))
    return offsets - offsets.mean(axis=0)


def hand_at(
    center=(0.5, 0.5, 0.0),
    shape_id: int = 0,
    handedness: Handedness = Handedness.RIGHT,
    scale: float = 0.05,
    score: float = 1.0,
    jitter: np.ndarray | None = None,
) -> Hand:
    coords = np.asarray(center, dtype=float) + scale * shape_offsets(shape_id)
    if jitter is not None:
        coords = coords + jitter
    return Hand(
        handedness=handedness,
        landmarks=tuple(Landmark(*map(float, row)) for row in coords),
        score=score,
    )


def frame_at(
    frame_id: int,
    center=(0.5, 0.5, 0.0),
    shape_id: int = 0,
    handedness: Handedness = Handedness.RIGHT,
    scale: float = 0.05,
    jitter: np.ndarray | None = None,
) -> LandmarkFrame:
    return LandmarkFrame(
        frame_id=frame_id,
        hands=(hand_at(center, shape_id, handedness, scale, jitter=jitter),),
    )


def uniform_image(width: int, height: int, rgb=(110, 110, 110)) -> Image:
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    pixels[:] = np.asarray(rgb, dtype=np.uint8)
    return Image(pixels)


def random_image(rng: np.random.Generator, width: int = 16, height: int = 16) -> Image:
    return Image(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(42))
