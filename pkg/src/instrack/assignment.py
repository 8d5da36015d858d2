"""IoU cost matrices and gated optimal bipartite matching between detections and tracks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ValidationError
from .geometry import BoundingBox, iou_matrix


@dataclass(frozen=True)
class Match:
    detection_index: int
    track_index: int
    iou: float


@dataclass(frozen=True)
class AssignmentResult:
    """Partition of both index sets: every index is matched or in one unmatched list."""

    matches: tuple[Match, ...]
    unmatched_detections: tuple[int, ...]
    unmatched_tracks: tuple[int, ...]


def build_cost_matrix(
    detections: Sequence[BoundingBox], predictions: Sequence[BoundingBox]
) -> np.ndarray:
    """Cost (i, j) = 1 - IoU(detections[i], predictions[j]); shape |D| x |P|."""
    return 1.0 - iou_matrix(detections, predictions)


def solve(cost, gate: float) -> AssignmentResult:
    """Min-total-cost one-to-one matching, then demotion of sub-gate pairs.

    The matching is complete on the smaller side (rectangular matrices are
    implicitly padded with cost 1.0, the worst IoU; padded pairs are never
    emitted). Among equal-total-cost optima the result is canonical: the
    per-row decision vector (matched column, or "unmatched" last) is the
    lexicographically smallest, so ties always resolve to the lowest
    (detection_index, track_index) pairs. After solving, any tentative pair
    whose IoU (1 - cost) falls below `gate` is demoted: both indices are
    reported unmatched and the pair is dropped.
    """
    if not (0.0 <= gate <= 1.0):
        raise ValidationError(f"gate must lie in [0, 1], got {gate}")
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise ValidationError(f"cost matrix must be 2D, got shape {c.shape}")
    if c.size and not np.isfinite(c).all():
        raise ValidationError("cost matrix contains a non-finite entry")
    n_rows, n_cols = c.shape
    if n_rows == 0 or n_cols == 0:
        return AssignmentResult((), tuple(range(n_rows)), tuple(range(n_cols)))

    decided = _canonical_assignment(c)

    matches = []
    unmatched_d = []
    for i in range(n_rows):
        j = decided.get(i)
        if j is None:
            unmatched_d.append(i)
            continue
        pair_iou = 1.0 - float(c[i, j])
        if pair_iou < gate:
            unmatched_d.append(i)
        else:
            matches.append(Match(i, j, pair_iou))
    matched_cols = {m.track_index for m in matches}
    unmatched_t = [j for j in range(n_cols) if j not in matched_cols]
    return AssignmentResult(tuple(matches), tuple(unmatched_d), tuple(unmatched_t))


def solve_boxes(
    detections: Sequence[BoundingBox], predictions: Sequence[BoundingBox], gate: float
) -> AssignmentResult:
    """Convenience: build the 1 - IoU cost matrix and solve it."""
    return solve(build_cost_matrix(detections, predictions), gate)


def _canonical_assignment(c: np.ndarray) -> dict[int, int]:
    """Lexicographically smallest minimum-total complete matching.

    Greedy prefix fixing: for each row in order, take the smallest column that
    still admits an optimal completion (unmatched sorts last and only exists
    when rows outnumber columns). Candidate columns below the known-feasible
    reference choice are first screened with a lower bound and only then
    verified with a re-solve; totals are compared with math.fsum so equal real
    sums compare equal regardless of addition order.
    """
    n_rows, n_cols = c.shape
    best_total, reference = _complete(c, {}, frozenset())
    decided: dict[int, int] = {}
    unmatched_rows: set[int] = set()
    fixed_parts: list[float] = []

    for i in range(n_rows):
        ref_j = reference.pop(i, None)
        used = set(decided.values())
        chosen = ref_j
        limit = n_cols if ref_j is None else ref_j
        for j in range(limit):
            if j in used:
                continue
            if _lower_bound_exceeds(c, decided, unmatched_rows, i, j, fixed_parts, best_total):
                continue
            trial = dict(decided)
            trial[i] = j
            total, completion = _complete(c, trial, frozenset(unmatched_rows))
            if total == best_total:
                chosen = j
                reference = completion
                break
        if chosen is None:
            # every optimal completion of this prefix leaves the row unmatched
            if n_rows <= n_cols:
                raise AssertionError("internal: row must be matchable when rows <= cols")
            unmatched_rows.add(i)
        else:
            decided[i] = chosen
            fixed_parts.append(float(c[i, chosen]))
    return decided


def _complete(
    c: np.ndarray, fixed: dict[int, int], skipped_rows: frozenset[int]
) -> tuple[float, dict[int, int | None]]:
    """Best completion given fixed row->col choices and rows forced unmatched.

    Returns (fsum total over real pairs, assignment of the remaining rows)."""
    n_rows, n_cols = c.shape
    rem_rows = [i for i in range(n_rows) if i not in fixed and i not in skipped_rows]
    used_cols = set(fixed.values())
    rem_cols = [j for j in range(n_cols) if j not in used_cols]
    parts = [float(c[i, j]) for i, j in fixed.items()]
    completion: dict[int, int | None] = {i: None for i in rem_rows}
    if rem_rows and rem_cols:
        sub = c[np.ix_(rem_rows, rem_cols)]
        r, s = sub.shape
        size = max(r, s)
        padded = np.ones((size, size), dtype=float)
        padded[:r, :s] = sub
        rows_idx, cols_idx = linear_sum_assignment(padded)
        for a, b in zip(rows_idx, cols_idx):
            if a < r and b < s:
                parts.append(float(sub[a, b]))
                completion[rem_rows[a]] = rem_cols[b]
    return math.fsum(parts), completion


def _lower_bound_exceeds(
    c: np.ndarray,
    decided: dict[int, int],
    unmatched_rows: set[int],
    i: int,
    j: int,
    fixed_parts: list[float],
    best_total: float,
) -> bool:
    """Cheap screen: True when fixing (i, j) provably cannot reach best_total.

    The bound charges every still-to-match element of the smaller side its
    cheapest remaining partner, so it never exceeds the true trial total."""
    n_rows, n_cols = c.shape
    rem_rows = [r for r in range(n_rows) if r not in decided and r not in unmatched_rows and r != i]
    used_cols = set(decided.values())
    rem_cols = [col for col in range(n_cols) if col not in used_cols and col != j]
    extra = 0.0
    if rem_rows and rem_cols:
        sub = c[np.ix_(rem_rows, rem_cols)]
        if n_rows <= n_cols:
            extra = float(np.sum(sub.min(axis=1)))  # every remaining row must match
        else:
            extra = float(np.sum(sub.min(axis=0)))  # every remaining column must match
    lower_bound = math.fsum(fixed_parts + [float(c[i, j]), extra])
    return lower_bound > best_total
