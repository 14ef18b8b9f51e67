"""Finite metric spaces: validation, extremes, balls, doubling estimation.

Distances live in a dense symmetric matrix. All operations are pure; the
matrix is frozen after validation so spaces can be shared freely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    AsymmetricMatrix,
    BadLambda,
    InvalidMatrix,
    NegativeDistance,
    TooFewPoints,
    TriangleViolation,
    ZeroOffDiagonal,
)

# Relative slack for the triangle check: matrices computed from coordinates
# can miss exact inequality by a few ulps, which is not a data defect.
_TRIANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite metric space with opaque point labels.

    dist[i][j] is the distance between the i-th and j-th points; coords is
    kept only when the space came from an embedded point set, for round trips.
    """

    point_ids: tuple
    dist: np.ndarray
    coords: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.point_ids)

    def distance(self, i: int, j: int) -> float:
        return float(self.dist[i, j])


def validate_metric(raw_matrix, point_ids=None, coords=None) -> FiniteMetricSpace:
    """Check metric axioms on a raw matrix and freeze it into a space.

    Raises AsymmetricMatrix, NegativeDistance, ZeroOffDiagonal, or
    TriangleViolation (with a witness triple) on the first defect found;
    InvalidMatrix for shape or label problems.
    """
    dist = np.asarray(raw_matrix, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {dist.shape}")
    n = dist.shape[0]

    if point_ids is None:
        point_ids = tuple(range(n))
    else:
        point_ids = tuple(point_ids)
        if len(point_ids) != n:
            raise InvalidMatrix(f"{len(point_ids)} labels for {n} points")
        if len(set(point_ids)) != n:
            raise InvalidMatrix("point labels must be unique")

    if not np.array_equal(dist, dist.T):
        i, j = np.argwhere(dist != dist.T)[0]
        raise AsymmetricMatrix(
            f"dist[{i}][{j}] = {dist[i, j]} but dist[{j}][{i}] = {dist[j, i]}"
        )
    if (dist < 0).any():
        i, j = np.argwhere(dist < 0)[0]
        raise NegativeDistance(f"dist[{i}][{j}] = {dist[i, j]}")
    if np.diagonal(dist).any():
        i = int(np.flatnonzero(np.diagonal(dist))[0])
        raise InvalidMatrix(f"diagonal entry dist[{i}][{i}] = {dist[i, i]} is nonzero")

    off = dist == 0
    np.fill_diagonal(off, False)
    if off.any():
        i, j = np.argwhere(off)[0]
        raise ZeroOffDiagonal(f"distinct points {i} and {j} are at distance zero")

    tol = _TRIANGLE_SLACK * (1.0 + float(dist.max(initial=0.0)))
    for j in range(n):
        via = dist[:, j][:, None] + dist[j, :][None, :]
        bad = dist > via + tol
        if bad.any():
            i, k = np.argwhere(bad)[0]
            raise TriangleViolation((int(i), int(j), int(k)), dist[i, k], via[i, k])

    dist = np.array(dist, dtype=float)
    dist.flags.writeable = False
    if coords is not None:
        coords = np.array(coords, dtype=float)
        if coords.shape[0] != n:
            raise InvalidMatrix(f"{coords.shape[0]} coordinate rows for {n} points")
        coords.flags.writeable = False
    return FiniteMetricSpace(point_ids=point_ids, dist=dist, coords=coords)


def extremes(space: FiniteMetricSpace) -> tuple[float, float]:
    """Return (diameter, minimum positive distance)."""
    if space.n < 2:
        raise TooFewPoints("extremes need at least two points")
    tri = np.triu_indices(space.n, k=1)
    off = space.dist[tri]
    return float(off.max()), float(off.min())


def ball_members(space: FiniteMetricSpace, center: int, radius: float) -> set[int]:
    """Indices of points in the closed ball around `center`."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if not 0 <= center < space.n:
        raise ValueError(f"center index {center} out of range")
    return {int(i) for i in np.flatnonzero(space.dist[center] <= radius)}


@dataclass(frozen=True)
class DoublingEstimate:
    """Doubling constant observed by probing, plus the probes that attain it.

    c0 >= every greedy cover recorded; log2_c0 feeds the dimension budget
    downstream. Probing bounds the constant from below, so c0 may sit under
    the constant of any continuum the points were sampled from; that is the
    intended reading for finite data.
    """

    c0: int
    log2_c0: float
    witnesses: tuple


def _greedy_cover_size(dist: np.ndarray, center: int, radius: float) -> int:
    # Cover B(center, 2r) by radius-r balls centered at its own points,
    # always taking the uncovered point of smallest index.
    uncovered = dist[center] <= 2.0 * radius
    size = 0
    while uncovered.any():
        p = int(np.argmax(uncovered))
        uncovered &= dist[p] > radius
        size += 1
    return size


def _default_probe_radii(space: FiniteMetricSpace) -> np.ndarray:
    # Every pairwise distance, plus half of each: these are the radii where
    # either the doubled ball or a covering ball changes membership, so the
    # sweep sees every value the cover count can take.
    tri = np.triu_indices(space.n, k=1)
    vals = np.unique(space.dist[tri])
    vals = vals[vals > 0]
    return np.unique(np.concatenate([vals / 2.0, vals]))


def estimate_doubling_constant(
    space: FiniteMetricSpace,
    probe_policy: Optional[Iterable[tuple[int, float]]] = None,
) -> DoublingEstimate:
    """Estimate the doubling constant by greedy covers over probed balls.

    Default policy probes every center against every pairwise distance and
    half-distance. Deterministic: probes run in (center, radius) order and
    witnesses record the probes attaining the maximum (at most 16 kept).
    """
    if space.n < 2:
        raise TooFewPoints("doubling estimation needs at least two points")

    if probe_policy is None:
        radii = _default_probe_radii(space)
        sorted_rows = np.sort(space.dist, axis=1)

        def probes():
            for center in range(space.n):
                row = sorted_rows[center]
                for radius in radii:
                    yield center, float(radius), row
    else:
        def probes():
            for center, radius in probe_policy:
                yield int(center), float(radius), None

    best = 0
    witnesses: list[tuple[int, float, int]] = []
    for center, radius, sorted_row in probes():
        if sorted_row is not None:
            # A cover can never use more balls than the doubled ball has
            # points, so skip probes that cannot reach the current maximum.
            reach = int(np.searchsorted(sorted_row, 2.0 * radius, side="right"))
            if reach < best:
                continue
        size = _greedy_cover_size(space.dist, center, radius)
        if size > best:
            best = size
            witnesses = [(center, radius, size)]
        elif size == best and len(witnesses) < 16:
            witnesses.append((center, radius, size))
    return DoublingEstimate(c0=best, log2_c0=math.log2(best), witnesses=tuple(witnesses))


def covering_bound(c0: int, lam: float) -> int:
    """Covering count guaranteed for a ball of lam times the base radius.

    A doubling constant c0 bounds covers of doubled balls; composing gives
    ceil(c0 * lam**log2(c0)) for arbitrary lam >= 1.
    """
    if int(c0) != c0 or c0 < 1:
        raise ValueError(f"c0 must be a positive integer, got {c0}")
    if lam < 1:
        raise BadLambda(f"radius factor must be >= 1, got {lam}")
    value = c0 * lam ** math.log2(c0)
    nearest = round(value)
    # Float powers of exact integer cases can land a hair above the true
    # integer; snap before taking the ceiling.
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return math.ceil(value)
