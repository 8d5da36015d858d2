"""Per-instruction tracking metrics (IDF1, MOTA, recall, precision) and their
instruction-averaged aggregates RIDF1, RMOTA, RRcll, RPrcn."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .assignment import solve
from .difficulty import Level
from .errors import ConsistencyError, EmptyEvaluationError, ValidationError
from .formats import GtRecord, InstructionTask
from .geometry import BoundingBox, iou

# frame_key -> [(object_id, box), ...]
FrameObjects = Mapping[str, Sequence[tuple[int, BoundingBox]]]


@dataclass(frozen=True)
class InstructionCounts:
    tp: int
    fp: int
    fn: int
    idsw: int
    gt_total: int
    idtp: int
    idfp: int
    idfn: int


@dataclass(frozen=True)
class ClearOutcome:
    tp: int
    fp: int
    fn: int
    idsw: int
    gt_total: int
    # one {gt_id: pred_id} map per frame, in evaluation order
    correspondences: tuple[dict[int, int], ...]


def _frame_objects(objects: Sequence[tuple[int, BoundingBox]], frame_key: str, side: str):
    seen = set()
    for object_id, _ in objects:
        if object_id in seen:
            raise ValidationError(f"duplicate {side} id {object_id} in frame {frame_key!r}")
        seen.add(object_id)
    return sorted(objects, key=lambda item: item[0])


def match_frames(
    gt_by_frame: FrameObjects,
    pred_by_frame: FrameObjects,
    frame_order: Sequence[str],
    tp_iou: float = 0.5,
) -> ClearOutcome:
    """Frame-by-frame correspondence with carry-over.

    Each frame first carries over the previous frame's (gt_id, pred_id) pairs
    that still overlap at or above tp_iou, then matches the remainder with the
    Hungarian solver maximizing IoU under the same gate. An identity switch is
    counted whenever a gt id's matched pred id differs from the one at its
    previous matched frame.
    """
    if not (0.0 < tp_iou <= 1.0):
        raise ValidationError(f"tp_iou must lie in (0, 1], got {tp_iou}")
    corr: dict[int, int] = {}
    last_pred_for_gt: dict[int, int] = {}
    tp = fp = fn = idsw = gt_total = 0
    per_frame: list[dict[int, int]] = []

    for frame_key in frame_order:
        gt_objs = _frame_objects(gt_by_frame.get(frame_key, ()), frame_key, "gt")
        pred_objs = _frame_objects(pred_by_frame.get(frame_key, ()), frame_key, "pred")
        gt_total += len(gt_objs)
        gt_boxes = {i: b for i, b in gt_objs}
        pred_boxes = {i: b for i, b in pred_objs}

        frame_corr: dict[int, int] = {}
        for gt_id in sorted(corr):
            pred_id = corr[gt_id]
            if gt_id in gt_boxes and pred_id in pred_boxes:
                if iou(gt_boxes[gt_id], pred_boxes[pred_id]) >= tp_iou:
                    frame_corr[gt_id] = pred_id

        taken = set(frame_corr.values())
        rem_gt = [(i, b) for i, b in gt_objs if i not in frame_corr]
        rem_pred = [(i, b) for i, b in pred_objs if i not in taken]
        if rem_gt and rem_pred:
            overlap = np.array(
                [[iou(gb, pb) for _, pb in rem_pred] for _, gb in rem_gt], dtype=float
            )
            masked = np.where(overlap >= tp_iou, overlap, 0.0)
            result = solve(1.0 - masked, gate=tp_iou)
            for m in result.matches:
                frame_corr[rem_gt[m.detection_index][0]] = rem_pred[m.track_index][0]

        tp += len(frame_corr)
        fn += len(gt_objs) - len(frame_corr)
        fp += len(pred_objs) - len(frame_corr)
        for gt_id in sorted(frame_corr):
            pred_id = frame_corr[gt_id]
            previous = last_pred_for_gt.get(gt_id)
            if previous is not None and previous != pred_id:
                idsw += 1
            last_pred_for_gt[gt_id] = pred_id

        corr = frame_corr
        per_frame.append(dict(frame_corr))

    return ClearOutcome(tp, fp, fn, idsw, gt_total, tuple(per_frame))


def idf1(
    gt_by_frame: FrameObjects,
    pred_by_frame: FrameObjects,
    frame_order: Sequence[str],
    tp_iou: float = 0.5,
) -> tuple[float, int, int, int]:
    """Identity F1 under the globally optimal one-to-one id assignment.

    A (gt, pred) pair is co-located at a frame when both are present and their
    boxes overlap at or above tp_iou; the assignment minimizes total
    non-co-located frames, equivalently maximizes total co-located frames.
    Returns (idf1, idtp, idfp, idfn).
    """
    gt_ids = sorted({i for fk in frame_order for i, _ in gt_by_frame.get(fk, ())})
    pred_ids = sorted({i for fk in frame_order for i, _ in pred_by_frame.get(fk, ())})
    gt_pos = {g: k for k, g in enumerate(gt_ids)}
    pred_pos = {p: k for k, p in enumerate(pred_ids)}

    colocated = np.zeros((len(gt_ids), len(pred_ids)), dtype=int)
    total_gt = 0
    total_pred = 0
    for frame_key in frame_order:
        gt_objs = gt_by_frame.get(frame_key, ())
        pred_objs = pred_by_frame.get(frame_key, ())
        total_gt += len(gt_objs)
        total_pred += len(pred_objs)
        for g_id, g_box in gt_objs:
            for p_id, p_box in pred_objs:
                if iou(g_box, p_box) >= tp_iou:
                    colocated[gt_pos[g_id], pred_pos[p_id]] += 1

    if len(gt_ids) and len(pred_ids):
        rows, cols = linear_sum_assignment(-colocated)
        idtp = int(colocated[rows, cols].sum())
    else:
        idtp = 0
    idfn = total_gt - idtp
    idfp = total_pred - idtp
    denominator = 2 * idtp + idfp + idfn
    value = (2 * idtp / denominator) if denominator > 0 else 0.0
    return value, idtp, idfp, idfn


def mota(counts: InstructionCounts) -> float:
    """Raw MOTA = 1 - (FN + FP + IDSW) / GT; may be negative."""
    if counts.gt_total <= 0:
        raise ValidationError("MOTA undefined for an instruction with no ground truth")
    return 1.0 - (counts.fn + counts.fp + counts.idsw) / counts.gt_total


@dataclass(frozen=True)
class InstructionResult:
    task_id: str
    level: Level | None
    counts: InstructionCounts
    idf1: float
    mota_raw: float | None
    mota_clamped: float | None
    recall: float | None
    precision: float | None

    @property
    def evaluable(self) -> bool:
        return self.counts.gt_total > 0


def records_by_frame(records: Sequence[GtRecord]) -> dict[str, list[tuple[int, BoundingBox]]]:
    out: dict[str, list[tuple[int, BoundingBox]]] = {}
    for record in records:
        out.setdefault(record.frame_name, []).append((record.object_id, record.box))
    return out


def evaluate_instruction(
    task_id: str,
    level: Level | None,
    gt_by_frame: FrameObjects,
    pred_by_frame: FrameObjects,
    frame_order: Sequence[str],
    tp_iou: float = 0.5,
) -> InstructionResult:
    """Score one instruction. Instructions with no ground truth in the evaluated
    segment get counts only; MOTA/recall stay undefined and the caller excludes
    them from the averages."""
    clear = match_frames(gt_by_frame, pred_by_frame, frame_order, tp_iou)
    idf1_value, idtp, idfp, idfn = idf1(gt_by_frame, pred_by_frame, frame_order, tp_iou)
    counts = InstructionCounts(
        clear.tp, clear.fp, clear.fn, clear.idsw, clear.gt_total, idtp, idfp, idfn
    )
    if counts.gt_total > 0:
        raw = mota(counts)
        clamped = max(raw, 0.0)
        recall = counts.tp / (counts.tp + counts.fn)
        # an empty prediction earns 0 precision rather than a flattering 1.0
        precision = counts.tp / (counts.tp + counts.fp) if (counts.tp + counts.fp) > 0 else 0.0
    else:
        raw = clamped = recall = precision = None
    return InstructionResult(task_id, level, counts, idf1_value, raw, clamped, recall, precision)


def evaluate_task(
    task: InstructionTask, predictions: Sequence[GtRecord], tp_iou: float = 0.5
) -> InstructionResult:
    """Evaluate predictions (gt-format records) against a loaded task."""
    known = set(task.frame_names)
    for record in predictions:
        if record.frame_name not in known:
            raise ConsistencyError(
                f"task {task.task_id!r}: prediction names unknown frame {record.frame_name!r}"
            )
    return evaluate_instruction(
        task.task_id,
        task.level,
        records_by_frame(list(task.gt)),
        records_by_frame(list(predictions)),
        task.frame_names,
        tp_iou,
    )


@dataclass(frozen=True)
class Aggregates:
    n: int
    ridf1: float
    rmota: float
    rrcll: float
    rprcn: float


@dataclass(frozen=True)
class MetricsReport:
    tp_iou: float
    instructions: tuple[InstructionResult, ...]
    overall: Aggregates
    by_level: dict[Level, Aggregates]
    excluded: tuple[str, ...]


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def aggregate(results: Sequence[InstructionResult], tp_iou: float = 0.5) -> MetricsReport:
    """Average per-instruction metrics; MOTA contributions are clamped at 0.
    Instructions with no ground truth are excluded from every average."""
    ordered = sorted(results, key=lambda r: r.task_id)
    evaluable = [r for r in ordered if r.evaluable]
    excluded = tuple(r.task_id for r in ordered if not r.evaluable)
    if not evaluable:
        raise EmptyEvaluationError("no evaluable instructions")

    def summarize(group: list[InstructionResult]) -> Aggregates:
        return Aggregates(
            n=len(group),
            ridf1=_mean([r.idf1 for r in group]),
            rmota=_mean([r.mota_clamped for r in group]),
            rrcll=_mean([r.recall for r in group]),
            rprcn=_mean([r.precision for r in group]),
        )

    by_level: dict[Level, Aggregates] = {}
    for level in Level:
        group = [r for r in evaluable if r.level == level]
        if group:
            by_level[level] = summarize(group)
    return MetricsReport(tp_iou, tuple(ordered), summarize(evaluable), by_level, excluded)


def render_report(report: MetricsReport, show_levels: bool = True) -> str:
    """Human-readable report: one row per instruction, then aggregate blocks
    (per difficulty level and overall)."""
    lines = []
    lines.append(f"instruction metrics (tp_iou={report.tp_iou:g})")
    lines.append("")
    header = (
        f"{'task_id':<40} {'level':<7} {'IDF1':>7} {'MOTA':>8} {'MOTA0':>7} "
        f"{'Rcll':>7} {'Prcn':>7} {'TP':>6} {'FP':>6} {'FN':>6} {'IDSW':>5} {'GT':>6}"
    )
    lines.append(header)
    for r in report.instructions:
        level = r.level.value if r.level else "-"
        if r.evaluable:
            lines.append(
                f"{r.task_id:<40} {level:<7} {r.idf1:>7.4f} {r.mota_raw:>8.4f} "
                f"{r.mota_clamped:>7.4f} {r.recall:>7.4f} {r.precision:>7.4f} "
                f"{r.counts.tp:>6} {r.counts.fp:>6} {r.counts.fn:>6} "
                f"{r.counts.idsw:>5} {r.counts.gt_total:>6}"
            )
        else:
            lines.append(f"{r.task_id:<40} {level:<7} excluded: no ground truth boxes")
    lines.append("")
    lines.append("aggregates")
    lines.append(f"{'group':<10} {'n':>5} {'RIDF1':>8} {'RMOTA':>8} {'RRcll':>8} {'RPrcn':>8}")

    def row(name: str, agg: Aggregates) -> str:
        return (
            f"{name:<10} {agg.n:>5} {agg.ridf1:>8.4f} {agg.rmota:>8.4f} "
            f"{agg.rrcll:>8.4f} {agg.rprcn:>8.4f}"
        )

    if show_levels:
        for level in (Level.EASY, Level.MEDIUM, Level.HARD):
            if level in report.by_level:
                lines.append(row(level.value, report.by_level[level]))
    lines.append(row("overall", report.overall))
    if report.excluded:
        lines.append("")
        lines.append(f"excluded ({len(report.excluded)} with no ground truth): "
                     + ", ".join(report.excluded))
    return "\n".join(lines) + "\n"


def report_to_dict(report: MetricsReport, manifest: dict | None = None) -> dict:
    """Machine-readable report with all counts and the producing configuration."""
    def agg_dict(agg: Aggregates) -> dict:
        return {"n": agg.n, "RIDF1": agg.ridf1, "RMOTA": agg.rmota,
                "RRcll": agg.rrcll, "RPrcn": agg.rprcn}

    payload: dict = {
        "tp_iou": report.tp_iou,
        "instructions": [
            {
                "task_id": r.task_id,
                "level": r.level.value if r.level else None,
                "evaluable": r.evaluable,
                "IDF1": r.idf1,
                "MOTA_raw": r.mota_raw,
                "MOTA_clamped": r.mota_clamped,
                "Rcll": r.recall,
                "Prcn": r.precision,
                "counts": {
                    "TP": r.counts.tp, "FP": r.counts.fp, "FN": r.counts.fn,
                    "IDSW": r.counts.idsw, "GT": r.counts.gt_total,
                    "IDTP": r.counts.idtp, "IDFP": r.counts.idfp, "IDFN": r.counts.idfn,
                },
            }
            for r in report.instructions
        ],
        "aggregates": {
            "overall": agg_dict(report.overall),
            **{level.value: agg_dict(agg) for level, agg in report.by_level.items()},
        },
        "excluded": list(report.excluded),
    }
    if manifest is not None:
        payload["manifest"] = manifest
    return payload


def report_to_json(report: MetricsReport, manifest: dict | None = None) -> str:
    return json.dumps(report_to_dict(report, manifest), indent=2, sort_keys=False) + "\n"
