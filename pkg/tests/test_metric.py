"""Metric validation, extremes, balls, and the doubling estimator.

The estimator expectations are frozen against the pure-Python oracle below,
which re-implements the greedy cover with scalar arithmetic.
"""
import itertools

import numpy as np
import pytest

from assouad.errors import (
    AsymmetricMatrix,
    BadLambda,
    InvalidMatrix,
    NegativeDistance,
    TooFewPoints,
    TriangleViolation,
    ZeroOffDiagonal,
)
from assouad.instances import line_instance, random_instance
from assouad.metric import (
    ball_members,
    covering_bound,
    estimate_doubling_constant,
    extremes,
    validate_metric,
)


def oracle_greedy_cover(dist, x, r):
    """Scalar re-implementation: cover the 2r-ball around x greedily by
    r-balls centered at its members, always centering on the first point
    not yet covered."""
    inside = [i for i in range(len(dist)) if dist[x][i] <= 2 * r]
    covered = set()
    count = 0
    for p in inside:
        if p in covered:
            continue
        count += 1
        for q in inside:
            if dist[p][q] <= r:
                covered.add(q)
    return count


def oracle_doubling(space):
    vals = sorted({space.dist[i, j] for i in range(space.n) for j in range(i + 1, space.n)})
    probes = sorted({v / 2 for v in vals} | set(vals))
    best = 1
    for x in range(space.n):
        for r in probes:
            best = max(best, oracle_greedy_cover(space.dist.tolist(), x, r))
    return best


class TestValidation:
    def test_accepts_plain_metric(self):
        space = validate_metric(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert space.n == 2
        assert space.distance(0, 1) == 1.0

    def test_point_ids_default_to_indices(self):
        space = validate_metric(np.zeros((3, 3)) + 1 - np.eye(3))
        assert space.point_ids == (0, 1, 2)

    def test_custom_point_ids(self):
        space = validate_metric(np.array([[0.0, 2.0], [2.0, 0.0]]), point_ids=["a", "b"])
        assert space.point_ids == ("a", "b")

    def test_rejects_duplicate_ids(self):
        with pytest.raises(InvalidMatrix):
            validate_metric(np.array([[0.0, 1.0], [1.0, 0.0]]), point_ids=["a", "a"])

    def test_rejects_non_square(self):
        with pytest.raises(InvalidMatrix):
            validate_metric(np.zeros((2, 3)))

    def test_rejects_asymmetry(self):
        with pytest.raises(AsymmetricMatrix):
            validate_metric(np.array([[0.0, 1.0], [1.1, 0.0]]))

    def test_rejects_negative(self):
        with pytest.raises(NegativeDistance):
            validate_metric(np.array([[0.0, -1.0], [-1.0, 0.0]]))

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(InvalidMatrix):
            validate_metric(np.array([[0.5, 1.0], [1.0, 0.0]]))

    def test_rejects_zero_off_diagonal(self):
        m = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        with pytest.raises(ZeroOffDiagonal):
            validate_metric(m)

    def test_rejects_triangle_violation_with_witness(self):
        m = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        with pytest.raises(TriangleViolation) as info:
            validate_metric(m)
        err = info.value
        assert err.direct == 5.0
        assert err.via == 2.0
        i, j, k = err.triple
        assert m[i, k] > m[i, j] + m[j, k]

    def test_triangle_tolerates_rounding(self):
        space = random_instance(40, seed=3)
        assert space.n == 40

    def test_matrix_frozen(self):
        space = validate_metric(np.array([[0.0, 1.0], [1.0, 0.0]]))
        with pytest.raises(ValueError):
            space.dist[0, 1] = 7.0


class TestExtremesAndBalls:
    def test_extremes_line(self):
        diam, d_min = extremes(line_instance(3))
        assert diam == 2.0
        assert d_min == 1.0

    def test_extremes_needs_two_points(self):
        with pytest.raises(TooFewPoints):
            extremes(line_instance(1))

    def test_ball_members_closed(self):
        space = line_instance(5)
        assert ball_members(space, 2, 1.0) == {1, 2, 3}
        assert ball_members(space, 0, 0.5) == {0}
        assert ball_members(space, 0, 10.0) == {0, 1, 2, 3, 4}


class TestDoublingEstimator:
    def test_pair_doubles_to_two(self, pair_space):
        est = estimate_doubling_constant(pair_space)
        assert est.c0 == 2
        assert est.c0 == oracle_doubling(pair_space)

    def test_line10_frozen_value(self, line10):
        est = estimate_doubling_constant(line10)
        assert est.c0 == oracle_doubling(line10) == 4

    def test_matches_oracle_on_random(self):
        space = random_instance(12, seed=5)
        assert estimate_doubling_constant(space).c0 == oracle_doubling(space)

    def test_witnesses_attain_the_estimate(self, line10):
        est = estimate_doubling_constant(line10)
        assert est.witnesses
        assert len(est.witnesses) <= 16
        for x, r, size in est.witnesses:
            assert size == est.c0
            assert oracle_greedy_cover(line10.dist.tolist(), x, r) == size

    def test_log2_recorded(self, line10):
        est = estimate_doubling_constant(line10)
        assert est.log2_c0 == pytest.approx(2.0)

    def test_explicit_probe_policy(self, line10):
        policy = [(x, 1.5) for x in range(10)]
        est = estimate_doubling_constant(line10, probe_policy=policy)
        assert est.c0 == max(
            oracle_greedy_cover(line10.dist.tolist(), x, 1.5) for x in range(10)
        )


class TestCoveringBound:
    def test_lambda_one_gives_c0(self):
        assert covering_bound(4, 1.0) == 4

    @pytest.mark.parametrize("c0", [2, 3, 4, 5])
    @pytest.mark.parametrize("m", [0, 1, 2, 3, 4, 5])
    def test_doubling_powers(self, c0, m):
        assert covering_bound(c0, 2.0 ** m) == c0 ** (m + 1)

    def test_fractional_lambda(self):
        # 2 * 3**log2(2) = 6 exactly; 3 * 1.5**log2(3) = 5.70.. rounds up
        assert covering_bound(2, 3.0) == 6
        assert covering_bound(3, 1.5) == 6

    def test_rejects_lambda_below_one(self):
        with pytest.raises(BadLambda):
            covering_bound(4, 0.5)
