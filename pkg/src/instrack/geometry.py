"""Axis-aligned box geometry and binary-mask primitives shared across the toolkit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class BoundingBox:
    """Box in pixel coordinates, (x1, y1) top-left corner and (x2, y2) bottom-right.

    Coordinates are real-valued. Zero-area boxes are legal values (they
    contribute zero intersection everywhere); the tracker filters them out at
    ingest so they never seed a trajectory.
    """

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in coords):
            raise ValidationError(f"box coordinates must be finite numbers, got {coords!r}")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValidationError(f"malformed box, needs x1 <= x2 and y1 <= y2: {coords!r}")

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def translate(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)


def box_from_sequence(values: Sequence[float]) -> BoundingBox:
    """Build a box from a 4-element [x1, y1, x2, y2] sequence."""
    if len(values) != 4:
        raise ValidationError(f"expected 4 box coordinates, got {len(values)}")
    return BoundingBox(float(values[0]), float(values[1]), float(values[2]), float(values[3]))


@dataclass(frozen=True)
class Detection:
    """One detector output: a box at a frame, with an optional confidence."""

    frame_index: int
    box: BoundingBox
    score: float | None = None

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise ValidationError(f"frame_index must be >= 0, got {self.frame_index}")
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"detection score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class BinaryMask:
    """Foreground pixel set on a width x height grid; pixels are (row, col) pairs."""

    width: int
    height: int
    pixels: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"mask dimensions must be positive, got {self.width}x{self.height}")
        for row, col in self.pixels:
            if not (0 <= row < self.height and 0 <= col < self.width):
                raise ValidationError(
                    f"mask pixel ({row}, {col}) outside {self.width}x{self.height} grid"
                )


def mask_from_pixels(width: int, height: int, pixels: Iterable[tuple[int, int]]) -> BinaryMask:
    return BinaryMask(width, height, frozenset((int(r), int(c)) for r, c in pixels))


def mask_from_array(array: np.ndarray) -> BinaryMask:
    """Build a mask from a 2D truthy array indexed [row, col]."""
    arr = np.asarray(array)
    if arr.ndim != 2:
        raise ValidationError(f"mask array must be 2D, got shape {arr.shape}")
    rows, cols = np.nonzero(arr)
    return BinaryMask(arr.shape[1], arr.shape[0], frozenset(zip(rows.tolist(), cols.tolist())))


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0.0 when the union has zero area."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = iw * ih if (iw > 0 and ih > 0) else 0.0
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def iou_matrix(rows: Sequence[BoundingBox], cols: Sequence[BoundingBox]) -> np.ndarray:
    """Pairwise IoU, shape (len(rows), len(cols)). Zero-area unions give 0."""
    if len(rows) == 0 or len(cols) == 0:
        return np.zeros((len(rows), len(cols)), dtype=float)
    a = np.asarray([b.as_tuple() for b in rows], dtype=float)
    b = np.asarray([b.as_tuple() for b in cols], dtype=float)
    ix1 = np.maximum(a[:, None, 0], b[None, :, 0])
    iy1 = np.maximum(a[:, None, 1], b[None, :, 1])
    ix2 = np.minimum(a[:, None, 2], b[None, :, 2])
    iy2 = np.minimum(a[:, None, 3], b[None, :, 3])
    inter = np.clip(ix2 - ix1, 0.0, None) * np.clip(iy2 - iy1, 0.0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0)
    return out


def mask_to_box(mask: BinaryMask) -> BoundingBox | None:
    """Tight box around the foreground; max sides extended by one pixel so a
    single pixel yields unit area. None for an empty mask."""
    if not mask.pixels:
        return None
    rows = [p[0] for p in mask.pixels]
    cols = [p[1] for p in mask.pixels]
    return BoundingBox(float(min(cols)), float(min(rows)), float(max(cols) + 1), float(max(rows) + 1))
