"""Extract bounding boxes from free-form model output text.

Models emit `[x1, y1, x2, y2]` groups in pixel coordinates, normalized [0, 1]
coordinates, or a 0-1000 grid depending on the family; the coordinate
convention is a bridge concern and is normalized to pixel-absolute here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_BOX_GROUP = re.compile(
    r"\[\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*,"
    r"\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*\]"
)

COORD_MODES = ("auto", "pixel", "normalized", "thousandths")


@dataclass(frozen=True)
class ParsedBoxes:
    boxes: tuple[tuple[float, float, float, float], ...]
    skipped: int  # bracket groups dropped as malformed


def parse_model_boxes(
    text: str,
    image_dims: tuple[int, int],
    coord_mode: str = "auto",
) -> ParsedBoxes:
    """Pull every [x1, y1, x2, y2] group out of `text`, in pixel coordinates.

    coord_mode:
      pixel        values are already pixels
      normalized   values in [0, 1], scaled by image width/height
      thousandths  values on a 0-1000 grid (some chat-style families), scaled
      auto         normalized when every value is <= 1, else pixel

    Inverted boxes (x1 > x2 or y1 > y2) are skipped and counted, never fatal.
    """
    if coord_mode not in COORD_MODES:
        raise ValueError(f"coord_mode must be one of {COORD_MODES}, got {coord_mode!r}")
    width, height = image_dims
    raw = [tuple(float(g) for g in m.groups()) for m in _BOX_GROUP.finditer(text)]
    if not raw:
        return ParsedBoxes((), 0)

    mode = coord_mode
    if mode == "auto":
        all_values = [v for box in raw for v in box]
        mode = "normalized" if all(v <= 1.0 for v in all_values) else "pixel"

    if mode == "normalized":
        scale = (width, height, width, height)
    elif mode == "thousandths":
        scale = (width / 1000.0, height / 1000.0, width / 1000.0, height / 1000.0)
    else:
        scale = (1.0, 1.0, 1.0, 1.0)

    boxes = []
    skipped = 0
    for values in raw:
        x1, y1, x2, y2 = (v * s for v, s in zip(values, scale))
        if x1 > x2 or y1 > y2:
            skipped += 1
            continue
        boxes.append((x1, y1, x2, y2))
    return ParsedBoxes(tuple(boxes), skipped)
