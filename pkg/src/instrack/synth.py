"""Deterministic synthetic scenes: parametric ground-truth trajectories plus
controllably corrupted detection streams, emitted in the benchmark layout."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .difficulty import AttributeTag, Category, Level, TaskAttributes, format_attribute_annotations
from .errors import ValidationError
from .formats import DetectionStream, GtRecord, format_gt, write_detections
from .geometry import BoundingBox, Detection

# rng purpose tags so every draw is keyed by (seed, purpose, frame, object)
# and reproducibility never depends on iteration order
_OBJ, _MISS, _JITTER, _FP, _FRAG = 1, 2, 3, 4, 5


def _rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=path)))


@dataclass(frozen=True)
class ObjectMotion:
    """Linear velocity in pixels/frame plus an optional sinusoidal lateral sway."""

    start_box: BoundingBox
    velocity: tuple[float, float]
    lateral_amplitude: float = 0.0
    lateral_period: float = 24.0
    visibility: tuple[int, int] | None = None  # [start, end) frames; None = whole clip


@dataclass(frozen=True)
class SceneSpec:
    n_objects: int
    n_frames: int
    canvas: tuple[int, int] = (1280, 720)
    size_range: tuple[float, float] = (30.0, 60.0)
    speed_range: tuple[float, float] = (1.0, 4.0)
    lateral_amplitude: float = 0.0
    window_fraction: float = 0.0  # chance an object only exists in a sub-window
    seed: int = 0
    objects: tuple[ObjectMotion, ...] | None = None  # explicit override

    def __post_init__(self) -> None:
        if self.n_objects < 1 or self.n_frames < 1:
            raise ValidationError("scene needs at least one object and one frame")
        if self.canvas[0] <= 0 or self.canvas[1] <= 0:
            raise ValidationError(f"canvas must be positive, got {self.canvas}")
        if not (0.0 <= self.window_fraction <= 1.0):
            raise ValidationError("window_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class CorruptionSpec:
    miss_prob: float = 0.0
    fp_rate: float = 0.0
    jitter_sigma: float = 0.0
    fragment_prob: float = 0.0
    fragment_gap: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("miss_prob", "fragment_prob"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {value}")
        if self.fp_rate < 0 or self.jitter_sigma < 0:
            raise ValidationError("fp_rate and jitter_sigma must be >= 0")
        if self.fragment_gap < 1:
            raise ValidationError("fragment_gap must be >= 1")


@dataclass
class Scene:
    spec: SceneSpec
    objects: tuple[ObjectMotion, ...]
    gt: list[GtRecord] = field(default_factory=list)
    frame_names: list[str] = field(default_factory=list)

    @property
    def frame_paths(self) -> list[str]:
        return [f"img/{name}.jpg" for name in self.frame_names]


def _clamp_into_canvas(box: BoundingBox, canvas: tuple[int, int]) -> BoundingBox:
    """Shift (never shrink) a box so it lies inside the canvas."""
    w, h = canvas
    dx = dy = 0.0
    if box.x1 < 0:
        dx = -box.x1
    elif box.x2 > w:
        dx = w - box.x2
    if box.y1 < 0:
        dy = -box.y1
    elif box.y2 > h:
        dy = h - box.y2
    return box.translate(dx, dy) if (dx or dy) else box


def _sample_objects(spec: SceneSpec) -> tuple[ObjectMotion, ...]:
    """Lane-based placement: one horizontal lane per object so trajectories of
    distinct objects never overlap, which keeps association unambiguous."""
    width, height = spec.canvas
    lane_height = height / spec.n_objects
    objects = []
    for k in range(spec.n_objects):
        rng = _rng(spec.seed, _OBJ, k)
        box_w = float(rng.uniform(*spec.size_range))
        box_h = float(min(rng.uniform(*spec.size_range), lane_height * 0.5))
        lane_center = (k + 0.5) * lane_height
        x1 = float(rng.uniform(0, max(width - box_w, 1)))
        y1 = lane_center - box_h / 2
        speed = float(rng.uniform(*spec.speed_range))
        direction = 1.0 if rng.random() < 0.5 else -1.0
        amplitude = min(spec.lateral_amplitude, max((lane_height - box_h) / 2 - 1, 0.0))
        period = float(rng.uniform(18, 40))
        visibility = None
        if spec.window_fraction > 0 and rng.random() < spec.window_fraction and spec.n_frames > 4:
            start = int(rng.integers(0, spec.n_frames - 2))
            end = int(rng.integers(start + 2, spec.n_frames + 1))
            visibility = (start, end)
        objects.append(
            ObjectMotion(
                start_box=BoundingBox(x1, y1, x1 + box_w, y1 + box_h),
                velocity=(direction * speed, 0.0),
                lateral_amplitude=amplitude,
                lateral_period=period,
                visibility=visibility,
            )
        )
    return tuple(objects)


def _box_at(motion: ObjectMotion, frame: int, canvas: tuple[int, int]) -> BoundingBox:
    dx = motion.velocity[0] * frame
    dy = motion.velocity[1] * frame
    if motion.lateral_amplitude:
        dy += motion.lateral_amplitude * math.sin(2 * math.pi * frame / motion.lateral_period)
    return _clamp_into_canvas(motion.start_box.translate(dx, dy), canvas)


def generate(spec: SceneSpec) -> Scene:
    """Deterministic scene: every box follows its object's motion, clamped to the
    canvas; gt rows exist only inside each object's visibility window."""
    objects = spec.objects if spec.objects is not None else _sample_objects(spec)
    if len(objects) != spec.n_objects:
        raise ValidationError(
            f"spec declares {spec.n_objects} objects but provides {len(objects)}"
        )
    frame_names = [f"{i:06d}" for i in range(spec.n_frames)]
    gt: list[GtRecord] = []
    for frame in range(spec.n_frames):
        for k, motion in enumerate(objects):
            start, end = motion.visibility if motion.visibility else (0, spec.n_frames)
            if not (start <= frame < end):
                continue
            gt.append(GtRecord(frame_names[frame], k + 1, _box_at(motion, frame, spec.canvas)))
    return Scene(spec=spec, objects=tuple(objects), gt=gt, frame_names=frame_names)


def gt_as_stream(scene: Scene) -> DetectionStream:
    """Replay ground truth verbatim as a detection stream."""
    return corrupt(scene, CorruptionSpec())


def corrupt(scene: Scene, spec: CorruptionSpec) -> DetectionStream:
    """Drop, jitter, fragment, and pollute the ground truth into a detection stream.

    Every random draw comes from a generator keyed by (seed, purpose, frame,
    object), so output is reproducible regardless of evaluation order.
    """
    index = {name: i for i, name in enumerate(scene.frame_names)}
    n_frames = len(scene.frame_names)
    canvas = scene.spec.canvas

    fragments: dict[int, tuple[int, int]] = {}
    if spec.fragment_prob > 0:
        object_ids = sorted({r.object_id for r in scene.gt})
        for object_id in object_ids:
            rng = _rng(spec.seed, _FRAG, object_id)
            if rng.random() < spec.fragment_prob and n_frames > spec.fragment_gap:
                start = int(rng.integers(0, n_frames - spec.fragment_gap))
                fragments[object_id] = (start, start + spec.fragment_gap)

    per_frame: dict[int, list[Detection]] = {}
    for record in scene.gt:
        frame = index[record.frame_name]
        gap = fragments.get(record.object_id)
        if gap and gap[0] <= frame < gap[1]:
            continue
        if spec.miss_prob > 0:
            if _rng(spec.seed, _MISS, frame, record.object_id).random() < spec.miss_prob:
                continue
        box = record.box
        if spec.jitter_sigma > 0:
            rng = _rng(spec.seed, _JITTER, frame, record.object_id)
            dx, dy = rng.normal(0.0, spec.jitter_sigma, size=2)
            box = _clamp_into_canvas(box.translate(float(dx), float(dy)), canvas)
        per_frame.setdefault(frame, []).append(Detection(frame, box))

    if spec.fp_rate > 0:
        lo, hi = scene.spec.size_range
        for frame in range(n_frames):
            rng = _rng(spec.seed, _FP, frame)
            for _ in range(int(rng.poisson(spec.fp_rate))):
                w = float(rng.uniform(lo, hi))
                h = float(rng.uniform(lo, hi))
                x1 = float(rng.uniform(0, max(canvas[0] - w, 1)))
                y1 = float(rng.uniform(0, max(canvas[1] - h, 1)))
                per_frame.setdefault(frame, []).append(
                    Detection(frame, BoundingBox(x1, y1, x1 + w, y1 + h))
                )

    return DetectionStream(frames={f: per_frame[f] for f in sorted(per_frame)})


_PLACEHOLDER_DESCRIPTION_CJK = "场景中沿固定方向移动的全部目标"
_PLACEHOLDER_DESCRIPTION_EN = "all objects moving steadily across the scene"


def emit_task(
    root: str | Path,
    scene: Scene,
    task_id: str,
    instruction: str = _PLACEHOLDER_DESCRIPTION_EN,
    level: Level | None = None,
    detections: DetectionStream | None = None,
    attributes: Sequence[AttributeTag] | None = None,
) -> Path:
    """Write the benchmark directory layout for one synthetic instruction.

    Train-style tasks keep path.txt at the task root; leveled (test-style) tasks
    nest under the level directory and keep the listing under img/. A detection
    stream file and an attribute annotation file ride along when provided.
    """
    base = Path(root)
    task_dir = (base / level.value / task_id) if level else (base / task_id)
    task_dir.mkdir(parents=True, exist_ok=True)

    (task_dir / "gt").write_text(format_gt(scene.gt), encoding="utf-8")
    listing = "\n".join(scene.frame_paths) + "\n"
    if level:
        (task_dir / "img").mkdir(exist_ok=True)
        (task_dir / "img" / "path.txt").write_text(listing, encoding="utf-8")
    else:
        (task_dir / "path.txt").write_text(listing, encoding="utf-8")
    description = f"{_PLACEHOLDER_DESCRIPTION_CJK}\n{instruction}\n"
    (task_dir / "description.txt").write_text(description, encoding="utf-8")

    if detections is not None:
        (task_dir / "detections.jsonl").write_text(write_detections(detections), encoding="utf-8")
    tags = tuple(attributes) if attributes else (
        AttributeTag(Category.SPECIFIC_NOUN, "direct description", 1),
    )
    annotation = TaskAttributes(task_id=task_id, tags=tags)
    (task_dir / "attributes.jsonl").write_text(
        format_attribute_annotations([annotation]), encoding="utf-8"
    )
    return task_dir
