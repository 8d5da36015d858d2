"""Propagation-model interface plus deterministic stubs.

A propagation model predicts a segmentation mask for a tracked target in the
current frame given its first-frame anchor and the frames seen during its
lifetime. Real video-segmentation backends (SAM2-style) plug in behind
`PropagationModel`; the stubs below make the protocol testable without
weights or a GPU.
"""

from __future__ import annotations

from typing import Sequence

Pixel = tuple[int, int]  # (row, col)
Box = tuple[float, float, float, float]


class PropagationModel:
    """Interface for mask propagation backends.

    `propagate` receives the track's first frame number and first box, the
    frame paths seen during the track's lifetime, and the current frame path;
    it returns the predicted foreground pixel set (empty or None when the
    target is lost). Paths may be placeholders in synthetic runs; stubs never
    open them.
    """

    def propagate(
        self,
        init_frame: int,
        init_box: Box,
        history_frames: Sequence[str],
        current_frame: str,
    ) -> set[Pixel] | None:
        raise NotImplementedError


def rasterize_box(box: Box) -> set[Pixel]:
    """Integer pixel set covering [x1, x2) x [y1, y2)."""
    x1, y1, x2, y2 = (int(round(v)) for v in box)
    return {(row, col) for row in range(y1, y2) for col in range(x1, x2)}


def mask_bounds(pixels: set[Pixel] | None) -> tuple[int, int, int, int] | None:
    """Tight box around a pixel set, max sides extended by one pixel; None when empty."""
    if not pixels:
        return None
    rows = [p[0] for p in pixels]
    cols = [p[1] for p in pixels]
    return (min(cols), min(rows), max(cols) + 1, max(rows) + 1)


class TranslateStubModel(PropagationModel):
    """Moves the init box by a constant velocity per elapsed frame.

    The elapsed frame count is the lifetime history length (the tracker sends
    one history path per frame between the anchor and the current frame)."""

    def __init__(self, vx: float, vy: float):
        self.vx = vx
        self.vy = vy

    def propagate(self, init_frame, init_box, history_frames, current_frame):
        delta = len(history_frames)
        x1, y1, x2, y2 = init_box
        moved = (x1 + self.vx * delta, y1 + self.vy * delta,
                 x2 + self.vx * delta, y2 + self.vy * delta)
        return rasterize_box(moved)


class StaticStubModel(TranslateStubModel):
    """Always predicts the init box, unmoved."""

    def __init__(self):
        super().__init__(0.0, 0.0)


class EmptyStubModel(PropagationModel):
    """Always loses the target (empty mask -> null box reply)."""

    def propagate(self, init_frame, init_box, history_frames, current_frame):
        return None


def make_model(spec: str) -> PropagationModel:
    """Build a model from a CLI spec: translate:<vx>,<vy> | static | empty."""
    if spec == "static":
        return StaticStubModel()
    if spec == "empty":
        return EmptyStubModel()
    if spec.startswith("translate:"):
        parts = spec[len("translate:"):].split(",")
        if len(parts) != 2:
            raise ValueError(f"translate spec needs vx,vy: {spec!r}")
        return TranslateStubModel(float(parts[0]), float(parts[1]))
    raise ValueError(f"unknown model spec {spec!r} (use translate:<vx>,<vy>, static, empty)")


class LinearStubDetector:
    """Deterministic detector stand-in: emits model-style text whose boxes move
    linearly per frame. Each entry is (start box, velocity)."""

    def __init__(self, objects: Sequence[tuple[Box, tuple[float, float]]]):
        self.objects = list(objects)

    def generate(self, prompt: str, frame_index: int) -> str:
        fragments = []
        for (x1, y1, x2, y2), (vx, vy) in self.objects:
            dx, dy = vx * frame_index, vy * frame_index
            fragments.append(
                f"[{x1 + dx:g}, {y1 + dy:g}, {x2 + dx:g}, {y2 + dy:g}]"
            )
        return "Detected objects: " + ", ".join(fragments) if fragments else "No objects found."
