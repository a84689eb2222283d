"""Image brightness and rotation augmentations.

One input image is expanded into an ordered sequence of augmented variants,
each described by a (delta_b, delta_r) stage: a brightness shift in HSV
value-channel units followed by a rotation in degrees. Detection is then
retried on each variant in order, which recovers hands the detector misses
on the raw image (too dark, tilted, ...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from .errors import UnknownSettingError


@dataclass(frozen=True, eq=False)
class Image:
    """An RGB image: (height, width, 3) uint8 pixels."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) pixel array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must have positive dimensions")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def value_channel(self) -> np.ndarray:
        """HSV value channel: per-pixel max over R, G, B."""
        return self.pixels.max(axis=2)

    @property
    def mean_value(self) -> float:
        """Mean of the HSV value channel over all pixels."""
        return float(self.value_channel.mean())


@dataclass(frozen=True)
class AugmentationStage:
    """One (delta_b, delta_r) pair; (0, 0) is the identity stage."""

    delta_b: int = 0
    delta_r: int = 0

    @property
    def is_identity(self) -> bool:
        return self.delta_b == 0 and self.delta_r == 0


@dataclass(frozen=True)
class AugmentationSetting:
    """An ordered, non-empty stage list. Order matters: detection takes the
    first stage that finds a hand."""

    stages: tuple[AugmentationStage, ...]

    def __post_init__(self):
        stages = tuple(
            s if isinstance(s, AugmentationStage) else AugmentationStage(*s)
            for s in self.stages
        )
        if not stages:
            raise ValueError("a setting needs at least one stage")
        object.__setattr__(self, "stages", stages)

    def __len__(self) -> int:
        return len(self.stages)

    def __iter__(self):
        return iter(self.stages)


# The four built-in stage lists. Setting 1 is the no-augmentation baseline,
# 2 varies brightness, 3 rotation, 4 is the union of 2 and 3.
_BUILTIN_SETTINGS: dict[int, tuple[tuple[int, int], ...]] = {
    1: ((0, 0),),
    2: ((0, 0), (30, 0), (60, 0)),
    3: ((0, 0), (0, -15), (0, 15), (0, -30), (0, 30)),
    4: ((0, 0), (30, 0), (60, 0), (0, -15), (0, 15), (0, -30), (0, 30)),
}


def builtin_setting(setting_id: int) -> AugmentationSetting:
    """Return one of the four built-in augmentation settings."""
    try:
        pairs = _BUILTIN_SETTINGS[setting_id]
    except (KeyError, TypeError):
        raise UnknownSettingError(f"no built-in setting {setting_id!r}; valid ids are 1-4") from None
    return AugmentationSetting(tuple(AugmentationStage(b, r) for b, r in pairs))


def adjust_brightness(img: Image, delta_b: int) -> Image:
    """Shift the HSV value channel by delta_b, clamped to [0, 255].

    Equivalent to converting each pixel to hue-saturation-value, updating
    V' = max(min(V + delta_b, 255), 0), and converting back. Because all
    RGB channels of a pixel are proportional to V at fixed hue/saturation,
    this reduces to scaling each channel by V'/V (rounding half-up), which
    keeps the output V exactly equal to the clamped formula.
    """
    if delta_b == 0:
        return img
    pixels = img.pixels.astype(np.float64)
    v = pixels.max(axis=2)
    v_new = np.clip(v + float(delta_b), 0.0, 255.0)
    # Black pixels have no hue to preserve; raising V on them yields gray.
    safe_v = np.where(v > 0.0, v, 1.0)
    ratio = np.where(v > 0.0, v_new / safe_v, 0.0)
    scaled = pixels * ratio[:, :, None]
    gray = np.repeat(v_new[:, :, None], 3, axis=2)
    out = np.where(v[:, :, None] > 0.0, scaled, gray)
    out = np.floor(out + 0.5).astype(np.uint8)
    return Image(out)


def rotated_bounds(width: int, height: int, delta_r: float) -> tuple[int, int]:
    """Canvas size that fully contains a w x h rectangle rotated by delta_r."""
    if delta_r % 90 == 0:
        return (width, height) if delta_r % 180 == 0 else (height, width)
    theta = math.radians(delta_r)
    cos, sin = abs(math.cos(theta)), abs(math.sin(theta))
    return (math.ceil(width * cos + height * sin), math.ceil(width * sin + height * cos))


def rotate(img: Image, delta_r: float) -> Image:
    """Rotate about the image center by delta_r degrees (positive is
    counter-clockwise), expanding the canvas so nothing is clipped.

    Right-angle rotations are exact pixel permutations; other angles use
    bilinear interpolation. Uncovered canvas is filled with black.
    """
    if delta_r % 360 == 0:
        return img
    if delta_r % 90 == 0:
        k = int(delta_r // 90) % 4
        return Image(np.ascontiguousarray(np.rot90(img.pixels, k=k)))

    w, h = img.width, img.height
    new_w, new_h = rotated_bounds(w, h, delta_r)
    matrix = cv2.getRotationMatrix2D(((w - 1) / 2.0, (h - 1) / 2.0), delta_r, 1.0)
    matrix[0, 2] += (new_w - w) / 2.0
    matrix[1, 2] += (new_h - h) / 2.0
    out = cv2.warpAffine(
        img.pixels,
        matrix,
        (new_w, new_h),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=(0, 0, 0),
    )
    return Image(out)


def rotation_matrix(width: int, height: int, delta_r: float) -> np.ndarray:
    """The 2x3 affine map taking source pixel coordinates to the rotated,
    expanded canvas produced by :func:`rotate`. Useful for mapping detected
    points back into the unrotated frame (invert it)."""
    new_w, new_h = rotated_bounds(width, height, delta_r)
    if delta_r % 90 == 0:
        # Mirror the exact np.rot90 grid permutation: for k odd the axes swap.
        k = int(delta_r // 90) % 4
        mats = {
            0: np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
            1: np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, width - 1.0]]),
            2: np.array([[-1.0, 0.0, width - 1.0], [0.0, -1.0, height - 1.0]]),
            3: np.array([[0.0, -1.0, height - 1.0], [1.0, 0.0, 0.0]]),
        }
        return mats[k]
    matrix = cv2.getRotationMatrix2D(((width - 1) / 2.0, (height - 1) / 2.0), delta_r, 1.0)
    matrix[0, 2] += (new_w - width) / 2.0
    matrix[1, 2] += (new_h - height) / 2.0
    return matrix


def apply_stage(img: Image, stage: AugmentationStage) -> Image:
    """Apply one augmentation stage: brightness shift, then rotation."""
    return rotate(adjust_brightness(img, stage.delta_b), stage.delta_r)
