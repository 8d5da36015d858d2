"""Assignment solver tests: optimality vs exhaustive enumeration, gating, and
deterministic lexicographic tie-breaking."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instrack.assignment import build_cost_matrix, solve
from instrack.errors import ValidationError
from instrack.geometry import BoundingBox
from reference import brute_force_min_total, brute_force_solution


def total_cost(cost, result):
    return math.fsum(cost[m.detection_index][m.track_index] for m in result.matches)


class TestBuildCostMatrix:
    def test_identity_pair(self):
        cost = build_cost_matrix([BoundingBox(0, 0, 10, 10)], [BoundingBox(0, 0, 10, 10)])
        assert cost.shape == (1, 1)
        assert cost[0, 0] == 0.0

    def test_empty_side(self):
        cost = build_cost_matrix([], [BoundingBox(0, 0, 10, 10)])
        assert cost.shape == (0, 1)

    def test_partial_overlap(self):
        cost = build_cost_matrix([BoundingBox(0, 0, 10, 10)], [BoundingBox(5, 0, 15, 10)])
        assert cost[0, 0] == pytest.approx(2 / 3, abs=1e-15)


class TestSolve:
    def test_diagonal_preferred(self):
        cost = [[0.1, 0.9], [0.9, 0.1]]
        assert brute_force_min_total(cost) == pytest.approx(0.2)
        result = solve(cost, gate=0.3)
        assert {(m.detection_index, m.track_index) for m in result.matches} == {(0, 0), (1, 1)}

    def test_gate_demotes_weak_pair(self):
        result = solve([[0.95]], gate=0.3)
        assert result.matches == ()
        assert result.unmatched_detections == (0,)
        assert result.unmatched_tracks == (0,)

    def test_empty_matrix(self):
        result = solve(np.zeros((0, 0)), gate=0.3)
        assert result.matches == () and result.unmatched_detections == ()
        assert result.unmatched_tracks == ()

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            solve([[float("inf")]], gate=0.3)
        with pytest.raises(ValidationError):
            solve([[float("nan")]], gate=0.3)

    def test_gate_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            solve([[0.5]], gate=1.5)

    def test_iou_equal_to_gate_is_kept(self):
        result = solve([[0.7]], gate=0.3)
        assert len(result.matches) == 1
        assert result.matches[0].iou == pytest.approx(0.3)

    def test_partition_is_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            rows = int(rng.integers(0, 6))
            cols = int(rng.integers(0, 6))
            cost = rng.integers(0, 65, size=(rows, cols)) / 64.0
            result = solve(cost, gate=0.4)
            matched_d = {m.detection_index for m in result.matches}
            matched_t = {m.track_index for m in result.matches}
            assert matched_d | set(result.unmatched_detections) == set(range(rows))
            assert matched_t | set(result.unmatched_tracks) == set(range(cols))
            assert len(matched_d) == len(result.matches)
            assert len(matched_t) == len(result.matches)
            assert all(m.iou >= 0.4 for m in result.matches)

    def test_rectangular_matches_smaller_side_before_gating(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            rows = int(rng.integers(1, 7))
            cols = int(rng.integers(1, 7))
            cost = rng.integers(0, 1025, size=(rows, cols)) / 1024.0
            result = solve(cost, gate=0.0)
            assert len(result.matches) == min(rows, cols)

    def test_optimality_on_seeded_matrices(self):
        rng = np.random.default_rng(123)
        for _ in range(150):
            rows = int(rng.integers(1, 6))
            cols = int(rng.integers(1, 6))
            cost = rng.integers(0, 1025, size=(rows, cols)) / 1024.0
            result = solve(cost, gate=0.0)
            assert total_cost(cost.tolist(), result) == brute_force_min_total(cost.tolist())

    def test_ties_break_lexicographically(self):
        # all-equal costs: identity matching is the lexicographic minimum
        cost = np.full((3, 3), 0.25)
        result = solve(cost, gate=0.0)
        assert [(m.detection_index, m.track_index) for m in result.matches] == [
            (0, 0), (1, 1), (2, 2),
        ]

    def test_tie_break_matches_reference_on_tie_rich_grids(self):
        rng = np.random.default_rng(42)
        for _ in range(120):
            rows = int(rng.integers(1, 5))
            cols = int(rng.integers(1, 5))
            # coarse grid of dyadic values forces frequent exact ties
            cost = rng.integers(0, 5, size=(rows, cols)) / 4.0
            result = solve(cost, gate=0.0)
            decision = brute_force_solution(cost.tolist())
            expected = [
                (i, j) for i, j in enumerate(decision) if j is not None
            ]
            assert [(m.detection_index, m.track_index) for m in result.matches] == expected

    def test_repeated_calls_identical(self):
        rng = np.random.default_rng(5)
        cost = rng.integers(0, 9, size=(4, 6)) / 8.0
        first = solve(cost, gate=0.2)
        for _ in range(5):
            assert solve(cost, gate=0.2) == first

    @given(
        st.integers(1, 4),
        st.integers(1, 4),
        st.integers(0, 2**31 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_property_optimal_total(self, rows, cols, seed):
        rng = np.random.default_rng(seed)
        cost = rng.integers(0, 129, size=(rows, cols)) / 128.0
        result = solve(cost, gate=0.0)
        assert total_cost(cost.tolist(), result) == brute_force_min_total(cost.tolist())
