"""Turn per-frame model outputs into the tracker's detection stream format."""

from __future__ import annotations

import json
from typing import Sequence

from .boxparse import parse_model_boxes
from .prompts import PromptFamily, render_prompt


def detection_stream_lines(
    backend,
    instruction: str,
    n_frames: int,
    image_dims: tuple[int, int],
    family: PromptFamily | str = PromptFamily.LLAVA_STYLE,
    coord_mode: str = "auto",
) -> tuple[list[str], int]:
    """One detection-stream JSON line per frame; returns (lines, skipped boxes).

    `backend.generate(prompt, frame_index)` supplies the raw model text per
    frame; unparseable fragments are counted, never fatal."""
    prompt = render_prompt(family, instruction)
    lines: list[str] = []
    skipped = 0
    for frame in range(n_frames):
        parsed = parse_model_boxes(backend.generate(prompt, frame), image_dims, coord_mode)
        skipped += parsed.skipped
        lines.append(json.dumps({"frame": frame, "boxes": [list(b) for b in parsed.boxes]}))
    return lines, skipped


def write_detection_stream(
    path,
    backend,
    instruction: str,
    n_frames: int,
    image_dims: tuple[int, int],
    family: PromptFamily | str = PromptFamily.LLAVA_STYLE,
    coord_mode: str = "auto",
) -> int:
    lines, skipped = detection_stream_lines(
        backend, instruction, n_frames, image_dims, family, coord_mode
    )
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    return skipped
