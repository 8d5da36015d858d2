"""Independent brute-force references used by the test suite.

Everything here is deliberately written against the documented behavior, not
against the library code: rasterized IoU, exhaustive assignment enumeration,
and replayed frame-correspondence bookkeeping. Slow but exact, for small inputs.
"""

from __future__ import annotations

import math
from itertools import permutations


def rasterized_iou(a, b, resolution: int = 100) -> float:
    """Count subpixel cells at `resolution` cells per unit on an integer grid.

    Only valid for boxes with integer corners within a modest window; used as
    the independent overlap oracle.
    """
    cells = 1.0 / resolution
    x_lo = min(a[0], b[0])
    x_hi = max(a[2], b[2])
    y_lo = min(a[1], b[1])
    y_hi = max(a[3], b[3])
    inter = 0
    union = 0
    nx = int(round((x_hi - x_lo) * resolution))
    ny = int(round((y_hi - y_lo) * resolution))
    for iy in range(ny):
        cy = y_lo + (iy + 0.5) * cells
        in_ay = a[1] < cy < a[3]
        in_by = b[1] < cy < b[3]
        if not (in_ay or in_by):
            continue
        for ix in range(nx):
            cx = x_lo + (ix + 0.5) * cells
            in_a = in_ay and a[0] < cx < a[2]
            in_b = in_by and b[0] < cx < b[2]
            if in_a and in_b:
                inter += 1
            if in_a or in_b:
                union += 1
    if union == 0:
        return 0.0
    return inter / union


def _injections(n_rows: int, n_cols: int):
    """All complete one-to-one matchings of the smaller side, as row-decision
    tuples (column index per row, None = unmatched)."""
    if n_rows <= n_cols:
        for cols in permutations(range(n_cols), n_rows):
            yield tuple(cols)
    else:
        for rows in permutations(range(n_rows), n_cols):
            decision: list[int | None] = [None] * n_rows
            for col, row in enumerate(rows):
                decision[row] = col
            yield tuple(decision)


def _decision_sort_key(decision):
    return tuple(math.inf if c is None else c for c in decision)


def brute_force_min_total(cost) -> float:
    """Minimum total over complete matchings of the smaller side (fsum totals)."""
    n_rows = len(cost)
    n_cols = len(cost[0]) if n_rows else 0
    if n_rows == 0 or n_cols == 0:
        return 0.0
    return min(
        math.fsum(cost[i][j] for i, j in enumerate(decision) if j is not None)
        for decision in _injections(n_rows, n_cols)
    )


def brute_force_solution(cost):
    """The lexicographically smallest minimum-total complete matching, as a
    row-decision tuple."""
    n_rows = len(cost)
    n_cols = len(cost[0]) if n_rows else 0
    if n_rows == 0 or n_cols == 0:
        return ()
    best_total = None
    best = None
    for decision in _injections(n_rows, n_cols):
        total = math.fsum(cost[i][j] for i, j in enumerate(decision) if j is not None)
        key = _decision_sort_key(decision)
        if best_total is None or total < best_total or (
            total == best_total and key < _decision_sort_key(best)
        ):
            best_total = total
            best = decision
    return best


def _match_one_frame(gt_objs, pred_objs, carried, tp_iou, iou_fn):
    """One frame of the correspondence rule: carry-over, then the exhaustive
    equivalent of Hungarian matching maximizing at-or-above-gate IoU."""
    gt_boxes = dict(gt_objs)
    pred_boxes = dict(pred_objs)
    frame_corr = {}
    for gt_id in sorted(carried):
        pred_id = carried[gt_id]
        if gt_id in gt_boxes and pred_id in pred_boxes:
            if iou_fn(gt_boxes[gt_id], pred_boxes[pred_id]) >= tp_iou:
                frame_corr[gt_id] = pred_id
    taken = set(frame_corr.values())
    rem_gt = sorted(g for g in gt_boxes if g not in frame_corr)
    rem_pred = sorted(p for p in pred_boxes if p not in taken)
    if rem_gt and rem_pred:
        masked = [
            [
                (lambda v: v if v >= tp_iou else 0.0)(iou_fn(gt_boxes[g], pred_boxes[p]))
                for p in rem_pred
            ]
            for g in rem_gt
        ]
        cost = [[1.0 - v for v in row] for row in masked]
        decision = brute_force_solution(cost)
        for row, col in enumerate(decision):
            if col is not None and masked[row][col] >= tp_iou:
                frame_corr[rem_gt[row]] = rem_pred[col]
    return frame_corr


def clear_events(gt_by_frame, pred_by_frame, frame_order, tp_iou, iou_fn):
    """Replay the per-frame correspondence rule; returns (tp, fp, fn, idsw, gt_total)."""
    corr = {}
    last_pred = {}
    tp = fp = fn = idsw = gt_total = 0
    for frame_key in frame_order:
        gt_objs = list(gt_by_frame.get(frame_key, ()))
        pred_objs = list(pred_by_frame.get(frame_key, ()))
        gt_total += len(gt_objs)
        corr = _match_one_frame(gt_objs, pred_objs, corr, tp_iou, iou_fn)
        tp += len(corr)
        fn += len(gt_objs) - len(corr)
        fp += len(pred_objs) - len(corr)
        for gt_id in sorted(corr):
            pred_id = corr[gt_id]
            if gt_id in last_pred and last_pred[gt_id] != pred_id:
                idsw += 1
            last_pred[gt_id] = pred_id
    return tp, fp, fn, idsw, gt_total


def exhaustive_idf1(gt_by_frame, pred_by_frame, frame_order, tp_iou, iou_fn):
    """IDF1 by enumerating every one-to-one id assignment."""
    gt_ids = sorted({i for fk in frame_order for i, _ in gt_by_frame.get(fk, ())})
    pred_ids = sorted({i for fk in frame_order for i, _ in pred_by_frame.get(fk, ())})
    coloc = {(g, p): 0 for g in gt_ids for p in pred_ids}
    total_gt = 0
    total_pred = 0
    for fk in frame_order:
        gt_objs = list(gt_by_frame.get(fk, ()))
        pred_objs = list(pred_by_frame.get(fk, ()))
        total_gt += len(gt_objs)
        total_pred += len(pred_objs)
        for g, gb in gt_objs:
            for p, pb in pred_objs:
                if iou_fn(gb, pb) >= tp_iou:
                    coloc[(g, p)] += 1

    best_idtp = 0
    k = min(len(gt_ids), len(pred_ids))
    for size in range(k + 1):
        from itertools import combinations

        for gs in combinations(gt_ids, size):
            for ps in permutations(pred_ids, size):
                idtp = sum(coloc[(g, p)] for g, p in zip(gs, ps))
                best_idtp = max(best_idtp, idtp)
    idfn = total_gt - best_idtp
    idfp = total_pred - best_idtp
    denom = 2 * best_idtp + idfp + idfn
    value = 2 * best_idtp / denom if denom > 0 else 0.0
    return value, best_idtp, idfp, idfn
