"""Per-model-family prompt templates for box-producing detection queries.

The templates are fixed strings validated byte-for-byte by the test fixtures;
changing them changes what deployed models receive, so edit with care.
"""

from __future__ import annotations

from enum import Enum


class PromptFamily(str, Enum):
    LLAVA_STYLE = "llava_style"
    QWEN_CHAT_STYLE = "qwen_chat_style"
    INTERNVL_QWEN25_STYLE = "internvl_qwen25_style"


def render_prompt(family: PromptFamily | str, instruction: str) -> str:
    """Wrap an instruction in the family's detection prompt."""
    if not instruction:
        raise ValueError("instruction must be nonempty")
    family = PromptFamily(family)
    if family is PromptFamily.LLAVA_STYLE:
        return (
            f"Please detect all {instruction} in the image and output their "
            "coordinates with [x1, y1, x2, y2] format."
        )
    if family is PromptFamily.QWEN_CHAT_STYLE:
        return instruction
    return (
        f"Please detect and label all {instruction} in the following image "
        "and mark their positions."
    )
