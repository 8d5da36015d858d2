"""Readers and writers for the benchmark on-disk layout, detection streams, and
track output, plus the train/test frame split rule."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .difficulty import Level
from .errors import ConsistencyError, LoadError, ParseError, ValidationError
from .geometry import BoundingBox, Detection, box_from_sequence

# Directory names that mark a difficulty split; the source layout spells
# medium "meidum" in places, so both are accepted.
_LEVEL_DIR_NAMES = {
    "easy": Level.EASY,
    "medium": Level.MEDIUM,
    "meidum": Level.MEDIUM,
    "hard": Level.HARD,
}


@dataclass(frozen=True)
class GtRecord:
    """One ground-truth line: `frame_name, object_id, x1, y1, x2, y2`."""

    frame_name: str
    object_id: int
    box: BoundingBox

    def __post_init__(self) -> None:
        if self.object_id < 0:
            raise ValidationError(f"object_id must be >= 0, got {self.object_id}")


def _num(value: float) -> str:
    """Integral reals print as integers so round-tripped files stay tidy."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def parse_gt(text: str) -> list[GtRecord]:
    """Parse comma-separated gt lines; tolerant of surrounding whitespace."""
    records: list[GtRecord] = []
    seen: dict[tuple[str, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 6:
            raise ParseError(f"expected 6 comma-separated fields, got {len(parts)}", line=lineno)
        frame_name = parts[0]
        if not frame_name:
            raise ParseError("empty frame_name", line=lineno)
        try:
            object_id = int(parts[1])
        except ValueError as exc:
            raise ParseError(f"object_id {parts[1]!r} is not an integer", line=lineno) from exc
        try:
            coords = [float(p) for p in parts[2:6]]
        except ValueError as exc:
            raise ParseError(f"non-numeric coordinate in {parts[2:6]!r}", line=lineno) from exc
        try:
            record = GtRecord(frame_name, object_id, box_from_sequence(coords))
        except ValidationError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        key = (frame_name, object_id)
        if key in seen:
            raise ParseError(
                f"duplicate (frame_name, object_id) {key!r}, first seen on line {seen[key]}",
                line=lineno,
            )
        seen[key] = lineno
        records.append(record)
    return records


def format_gt(records: Sequence[GtRecord]) -> str:
    lines = [
        f"{r.frame_name},{r.object_id},{_num(r.box.x1)},{_num(r.box.y1)},{_num(r.box.x2)},{_num(r.box.y2)}"
        for r in records
    ]
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class InstructionTask:
    """One language instruction with its frame list, ground truth, and level."""

    task_id: str
    instruction: str
    description_lines: tuple[str, ...]
    frame_paths: tuple[str, ...]
    gt: tuple[GtRecord, ...]
    level: Level | None = None

    def __post_init__(self) -> None:
        if not self.frame_paths:
            raise ValidationError(f"task {self.task_id!r} has no frames")
        index = self.frame_index_by_name()
        for record in self.gt:
            if record.frame_name not in index:
                raise ConsistencyError(
                    f"task {self.task_id!r}: gt names frame {record.frame_name!r} "
                    "which the frame listing lacks"
                )

    @property
    def frame_names(self) -> tuple[str, ...]:
        return tuple(Path(p).stem for p in self.frame_paths)

    def frame_index_by_name(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.frame_names)}

    def gt_by_frame(self) -> dict[str, list[tuple[int, BoundingBox]]]:
        out: dict[str, list[tuple[int, BoundingBox]]] = {}
        for record in self.gt:
            out.setdefault(record.frame_name, []).append((record.object_id, record.box))
        return out


def _pick_english_line(lines: Sequence[str]) -> str:
    """description.txt carries one line per language; take the first whose
    characters are ASCII-dominant."""
    candidates = [ln.strip() for ln in lines if ln.strip()]
    for line in candidates:
        ascii_count = sum(1 for ch in line if ord(ch) < 128)
        if ascii_count / len(line) > 0.5:
            return line
    if candidates:
        return candidates[0]
    return ""


def _find_gt_file(task_dir: Path) -> Path:
    for candidate in (task_dir / "gt", task_dir / "gt.txt", task_dir / "gt" / "gt.txt"):
        if candidate.is_file():
            return candidate
    raise LoadError(f"no gt file under {task_dir}")


def _find_paths_file(task_dir: Path) -> Path:
    for candidate in (task_dir / "path.txt", task_dir / "img" / "path.txt"):
        if candidate.is_file():
            return candidate
    raise LoadError(f"no path.txt under {task_dir}")


def load_task(task_dir: str | Path) -> InstructionTask:
    """Load one instruction directory: gt + frame-path listing + description.

    The difficulty level is inferred from an easy/medium/hard parent directory
    when present (e.g. test/easy/<task>); train-style directories get none.
    """
    directory = Path(task_dir)
    if not directory.is_dir():
        raise LoadError(f"task directory not found: {directory}")
    gt_path = _find_gt_file(directory)
    paths_path = _find_paths_file(directory)
    description_path = directory / "description.txt"
    if not description_path.is_file():
        raise LoadError(f"no description.txt under {directory}")

    try:
        gt_records = parse_gt(gt_path.read_text(encoding="utf-8"))
    except ParseError as exc:
        raise ParseError(f"{gt_path}: {exc}", line=exc.line) from exc
    frame_paths = [ln.strip() for ln in paths_path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    description_lines = tuple(
        ln.strip() for ln in description_path.read_text(encoding="utf-8").splitlines() if ln.strip()
    )

    level = _LEVEL_DIR_NAMES.get(directory.parent.name.lower())
    return InstructionTask(
        task_id=directory.name,
        instruction=_pick_english_line(description_lines),
        description_lines=description_lines,
        frame_paths=tuple(frame_paths),
        gt=tuple(gt_records),
        level=level,
    )


def split_frames(n_frames: int, train_fraction: float) -> tuple[range, range]:
    """First floor(train_fraction * n) frames train, remainder test."""
    if n_frames <= 0:
        raise ValidationError(f"n_frames must be positive, got {n_frames}")
    if not (0.0 < train_fraction < 1.0):
        raise ValidationError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    # epsilon keeps exact products (0.7 * 10) from flooring one short
    cut = math.floor(train_fraction * n_frames + 1e-9)
    return range(0, cut), range(cut, n_frames)


def split_tasks(task_ids: Iterable[str], train_fraction: float) -> tuple[list[str], list[str]]:
    """Count-based split over a task list (for sources annotated too sparsely to
    split inside one video): first fraction of the sorted ids train, rest test."""
    ordered = sorted(task_ids)
    train_range, test_range = split_frames(len(ordered), train_fraction)
    return [ordered[i] for i in train_range], [ordered[i] for i in test_range]


@dataclass
class DetectionStream:
    """Per-frame detections keyed by frame index; sparse frames mean no detections."""

    frames: dict[int, list[Detection]] = field(default_factory=dict)

    def detections_at(self, frame_index: int) -> list[Detection]:
        return self.frames.get(frame_index, [])

    def max_frame(self) -> int:
        return max(self.frames) if self.frames else -1

    def total_boxes(self) -> int:
        return sum(len(v) for v in self.frames.values())


def read_detections(text: str) -> DetectionStream:
    """One JSON object per line: {"frame": int, "boxes": [[x1,y1,x2,y2], ...],
    "scores": [...]} with strictly increasing frame indices."""
    stream = DetectionStream()
    previous = -1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}", line=lineno) from exc
        if not isinstance(obj, dict) or "frame" not in obj or "boxes" not in obj:
            raise ParseError("expected object with 'frame' and 'boxes'", line=lineno)
        frame = obj["frame"]
        if not isinstance(frame, int) or frame < 0:
            raise ParseError(f"'frame' must be a nonnegative integer, got {frame!r}", line=lineno)
        if frame <= previous:
            raise ParseError(
                f"frame indices must be strictly increasing ({frame} after {previous})", line=lineno
            )
        previous = frame
        boxes = obj["boxes"]
        scores = obj.get("scores")
        if scores is not None and len(scores) != len(boxes):
            raise ParseError("'scores' length differs from 'boxes'", line=lineno)
        detections = []
        for k, values in enumerate(boxes):
            try:
                box = box_from_sequence(values)
                detections.append(
                    Detection(frame, box, float(scores[k]) if scores is not None else None)
                )
            except (ValidationError, TypeError) as exc:
                raise ParseError(f"box {k}: {exc}", line=lineno) from exc
        stream.frames[frame] = detections
    return stream


def write_detections(stream: DetectionStream) -> str:
    lines = []
    for frame in sorted(stream.frames):
        detections = stream.frames[frame]
        obj: dict = {"frame": frame, "boxes": [list(d.box.as_tuple()) for d in detections]}
        if any(d.score is not None for d in detections):
            obj["scores"] = [d.score if d.score is not None else 1.0 for d in detections]
        lines.append(json.dumps(obj))
    return "\n".join(lines) + ("\n" if lines else "")


def write_tracks(
    trajectories,
    frame_names: Sequence[str],
    include_extrapolated: bool = False,
) -> str:
    """Emit committed boxes as gt-format lines (`frame_name, track_id, x1, y1, x2, y2`)
    ordered by (frame, track_id), so predictions re-load through parse_gt."""
    rows: list[tuple[int, int, BoundingBox]] = []
    for traj in trajectories:
        boxes: Mapping[int, BoundingBox] = dict(traj.committed)
        if include_extrapolated:
            for frame, box in traj.extrapolated.items():
                boxes.setdefault(frame, box)
        for frame, box in boxes.items():
            if not (0 <= frame < len(frame_names)):
                raise ConsistencyError(
                    f"track {traj.track_id} committed at frame {frame}, "
                    f"but only {len(frame_names)} frame names are known"
                )
            rows.append((frame, traj.track_id, box))
    rows.sort(key=lambda r: (r[0], r[1]))
    records = [GtRecord(frame_names[frame], tid, box) for frame, tid, box in rows]
    return format_gt(records)
