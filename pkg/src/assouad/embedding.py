"""Construction of the snowflake embedding.

The map is a direct product of blocks, one per (color, direction) pair. Each
block sums, over the scale ladder, bump functions planted on that color's net
members and weighted by adaptively chosen vectors. A vector is admissible
when the partial map it completes stays a fixed margin away from the values
the partial map takes on the annulus around its net member; scanning each
color class in both orders makes the margin available no matter which side of
the scan a nearby pair falls on.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    AlphaOutOfRange,
    DimensionTooSmall,
    Exhausted,
    OrderViolation,
    PackingExhausted,
    TauTooLarge,
    UnknownScale,
)
from .metric import FiniteMetricSpace
from .nets import NetLevel, ScaleLadder

FORWARD = "forward"
REVERSE = "reverse"
DIRECTIONS = (FORWARD, REVERSE)


@dataclass(frozen=True)
class Params:
    """Validated embedding parameters.

    The admissibility inequalities make every later bound true by
    construction: scale sums converge, each truncation tail stays under half
    the selection margin, per-scale Lipschitz constants stay under
    r_k**(alpha-1), and the candidate lattice outnumbers any exclusion set
    the selection can meet.
    """

    alpha: float
    tau: float
    c0: int
    log2_c0: float
    m: int
    chi: Optional[int] = None

    def with_chi(self, chi: int) -> "Params":
        return replace(self, chi=chi)


def validate_params(alpha: float, tau: float, c0: int, m: int) -> Params:
    """Gate parameters; the error names the first violated inequality.

    Non-strict comparisons carry a 1e-12 boundary slack so that conditions
    holding with exact equality in decimal arithmetic (such as tau = 1 - alpha
    at tau=0.2, alpha=0.8) are not rejected over float rounding.
    """
    if not 2.0 / 3.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (2/3, 1), got {alpha}")

    def le(a: float, b: float) -> bool:
        return a <= b + 1e-12 * max(1.0, abs(a), abs(b))

    def reject(desc: str, detail: str):
        raise TauTooLarge(f"tau={tau} violates {desc} ({detail})", inequality=desc)

    if not (0 < tau and le(tau, 1.0 - alpha)):
        reject("0 < tau <= 1 - alpha", f"1 - alpha = {1.0 - alpha}")
    if not tau < 0.5:
        reject("tau < 1/2", f"tau = {tau}")
    if not tau ** (2.0 * alpha) < 0.5:
        reject("tau**(2*alpha) < 1/2", f"got {tau ** (2.0 * alpha)}")
    if not le(tau * math.log(1.0 / tau), 1.0 - tau ** (2.0 * (1.0 - alpha))):
        reject(
            "1 - tau**(2*(1-alpha)) >= tau*log(1/tau)",
            f"{1.0 - tau ** (2.0 * (1.0 - alpha))} < {tau * math.log(1.0 / tau)}",
        )
    if not le(tau ** (2.0 * alpha - 1.0), 1.0 / 8.0):
        reject("tau**(2*alpha - 1) <= 1/8", f"got {tau ** (2.0 * alpha - 1.0)}")

    if int(c0) != c0 or c0 < 1:
        raise ValueError(f"c0 must be a positive integer, got {c0}")
    log2_c0 = math.log2(c0)
    if int(m) != m or not m > 8.0 * log2_c0:
        raise DimensionTooSmall(
            f"m must be an integer exceeding 8*log2(c0) = {8.0 * log2_c0}, got {m}"
        )
    return Params(alpha=float(alpha), tau=float(tau), c0=int(c0), log2_c0=log2_c0, m=int(m))


@dataclass(frozen=True)
class VectorAssignment:
    """One chosen vector: scale k, color, net member j, scan direction."""

    k: int
    color: int
    j: int
    direction: str
    v: np.ndarray


@dataclass
class EmbeddingMap:
    """Assembled embedding: levels plus one vector per (k, color, j, direction).

    dimension_n = 2 * chi * m; block layout is forward then reverse for each
    color in palette order.
    """

    space: FiniteMetricSpace
    params: Optional[Params]
    ladder: Optional[ScaleLadder]
    levels: Tuple[NetLevel, ...]
    assignments: Dict[tuple, np.ndarray]
    dimension_n: int

    @property
    def chi(self) -> int:
        return self.params.chi if self.params is not None and self.params.chi else 0

    def level_at(self, k: int) -> NetLevel:
        for level in self.levels:
            if level.k == k:
                return level
        raise UnknownScale(f"scale {k} is not on the ladder")

    def assignment_records(self) -> list[VectorAssignment]:
        keys = sorted(self.assignments, key=lambda key: (key[0], key[1], key[3], key[2]))
        return [
            VectorAssignment(k=k, color=color, j=j, direction=direction, v=self.assignments[(k, color, j, direction)])
            for (k, color, j, direction) in keys
        ]


def bump(space: FiniteMetricSpace, center: int, radius: float, x: int) -> float:
    """Tent cutoff: 1 on the radius ball around `center`, 0 beyond twice the
    radius, sloping at rate 1/radius in between."""
    if radius <= 0:
        raise ValueError(f"bump radius must be positive, got {radius}")
    return float(np.clip(2.0 - space.dist[x, center] / radius, 0.0, 1.0))


def _bump_values(space: FiniteMetricSpace, center: int, radius: float, pts: np.ndarray) -> np.ndarray:
    return np.clip(2.0 - space.dist[pts, center] / radius, 0.0, 1.0)


class _LatticeBall:
    """Lazy enumeration of the candidate lattice inside the vector budget.

    Points of spacing * Z**m with norm at most tau**2, produced in order of
    distance from the origin (ties lexicographic on the integer tuple). The
    spacing 7*tau**3 keeps candidates far enough apart that one exclusion
    ball of radius 3*tau**3 removes at most one of them. Prefixes are stable:
    first(a) is a prefix of first(b) whenever a <= b.
    """

    def __init__(self, tau: float, m: int):
        if tau <= 0:
            raise ValueError(f"tau must be positive, got {tau}")
        if int(m) != m or m < 1:
            raise ValueError(f"m must be a positive integer, got {m}")
        self.spacing = 7.0 * tau ** 3
        self.budget = tau * tau
        self.m = int(m)
        origin = (0,) * self.m
        self._heap: list[tuple[int, tuple]] = [(0, origin)]
        self._seen = {origin}
        self._points: list[np.ndarray] = []

    def _inside(self, sq: int) -> bool:
        return self.spacing * math.sqrt(sq) <= self.budget

    def first(self, count: int) -> list[np.ndarray]:
        while len(self._points) < count and self._heap:
            sq, z = heapq.heappop(self._heap)
            vec = self.spacing * np.array(z, dtype=float)
            vec.flags.writeable = False
            self._points.append(vec)
            for i in range(self.m):
                for step in (1, -1):
                    w = list(z)
                    w[i] += step
                    w = tuple(w)
                    if w in self._seen:
                        continue
                    w_sq = sq - z[i] * z[i] + w[i] * w[i]
                    if self._inside(w_sq):
                        self._seen.add(w)
                        heapq.heappush(self._heap, (w_sq, w))
        return list(self._points[:count])


def candidate_vectors(tau: float, m: int, count_needed: int) -> list[np.ndarray]:
    """First count_needed candidate vectors, origin first.

    Deterministic, pairwise >= 7*tau**3 apart, all with norm <= tau**2.
    Raises PackingExhausted when the lattice inside the budget ball runs out.
    """
    if count_needed < 0:
        raise ValueError(f"count_needed must be nonnegative, got {count_needed}")
    pool = _LatticeBall(tau, m)
    points = pool.first(count_needed)
    if len(points) < count_needed:
        raise PackingExhausted(
            f"candidate lattice holds only {len(points)} vectors for tau={tau}, m={m};"
            f" decrease tau or increase m"
        )
    return points


def select_vector(
    candidates: Sequence[np.ndarray], forbidden: Sequence[np.ndarray], radius: float
) -> np.ndarray:
    """First candidate at distance >= radius from every forbidden center.

    Candidates are assumed pairwise more than twice `radius` apart, so each
    forbidden center can disqualify at most one of them. Raises Exhausted
    when no candidate survives.
    """
    if forbidden:
        centers = np.asarray(forbidden, dtype=float).reshape(len(forbidden), -1)
        for cand in candidates:
            if np.linalg.norm(centers - cand, axis=1).min() >= radius:
                return cand
        raise Exhausted(f"all {len(candidates)} candidates sit inside exclusion balls")
    if len(candidates) == 0:
        raise Exhausted("no candidates supplied")
    return candidates[0]


def _ordered_members(level: NetLevel, color: int, direction: str) -> Tuple[int, ...]:
    members = level.classes.get(color, ())
    if direction == FORWARD:
        return members
    if direction == REVERSE:
        return tuple(reversed(members))
    raise ValueError(f"unknown direction {direction!r}")


def _history_values(
    emb: EmbeddingMap, color: int, direction: str, pts: np.ndarray, up_to_k: int
) -> np.ndarray:
    """Block value at pts summed over scales <= up_to_k (builder-side path).

    Accumulates member by member; scale indices below the ladder contribute
    nothing, so the coarsest scale sees an identically zero history.
    """
    out = np.zeros((len(pts), emb.params.m))
    alpha = emb.params.alpha
    for level in emb.levels:
        if level.k > up_to_k:
            break
        scale = level.r ** alpha
        for j in level.classes.get(color, ()):
            v = emb.assignments.get((level.k, color, j, direction))
            if v is None:
                raise OrderViolation(
                    f"missing vector for (k={level.k}, color={color}, j={j}, {direction})"
                )
            if not v.any():
                continue
            phi = _bump_values(emb.space, j, level.r, pts)
            if phi.any():
                out += scale * np.outer(phi, v)
    return out


def _running_values(
    emb: EmbeddingMap, level: NetLevel, color: int, direction: str, j: int, pts: np.ndarray
) -> np.ndarray:
    """History through the previous scale plus the same-scale members that
    precede j in this direction's scan order."""
    out = _history_values(emb, color, direction, pts, level.k - 1)
    members = _ordered_members(level, color, direction)
    scale = level.r ** emb.params.alpha
    for i in members[: members.index(j)]:
        v = emb.assignments.get((level.k, color, i, direction))
        if v is None:
            raise OrderViolation(
                f"missing vector for (k={level.k}, color={color}, j={i}, {direction})"
            )
        if not v.any():
            continue
        phi = _bump_values(emb.space, i, level.r, pts)
        if phi.any():
            out += scale * np.outer(phi, v)
    return out


def _check_scan_prefix(emb: EmbeddingMap, k: int, color: int, direction: str, j: int):
    for level in emb.levels:
        if level.k >= k:
            break
        for i in level.classes.get(color, ()):
            if (level.k, color, i, direction) not in emb.assignments:
                raise OrderViolation(
                    f"(k={k}, color={color}, j={j}, {direction}) needs the vector of"
                    f" (k={level.k}, j={i}) first"
                )
    level = emb.level_at(k)
    members = _ordered_members(level, color, direction)
    if j not in members:
        raise ValueError(f"point {j} is not in color class {color} at scale {k}")
    for i in members[: members.index(j)]:
        if (k, color, i, direction) not in emb.assignments:
            raise OrderViolation(
                f"(k={k}, color={color}, j={j}, {direction}) needs the vector of"
                f" (k={k}, j={i}) first"
            )


def forbidden_centers(
    state: EmbeddingMap, k: int, color: int, j: int, direction: str
) -> list[np.ndarray]:
    """Exclusion centers for the vector of net member j at scale k.

    For every x' in the closed radius ball around j and every y' in the
    annulus (2*r_k, 10*r_k/tau**2], the chosen vector must keep the completed
    value at x' away from the running partial value at y'; dividing the gap
    by r_k**alpha turns each pair into one excluded center in vector space.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    _check_scan_prefix(state, k, color, direction, j)
    level = state.level_at(k)
    params = state.params
    row = state.space.dist[:, j]
    inner = np.flatnonzero(row <= level.r)
    reach = 10.0 * level.r / (params.tau * params.tau)
    annulus = np.flatnonzero((row > 2.0 * level.r) & (row <= reach))
    if inner.size == 0 or annulus.size == 0:
        return []
    scale = level.r ** params.alpha
    history = _history_values(state, color, direction, inner, k - 1)
    running = _running_values(state, level, color, direction, j, annulus)
    centers = (running[None, :, :] - history[:, None, :]) / scale
    return [centers[a, b] for a in range(inner.size) for b in range(annulus.size)]


def build_embedding(
    space: FiniteMetricSpace,
    params: Optional[Params],
    ladder: Optional[ScaleLadder] = None,
    levels: Sequence[NetLevel] = (),
) -> EmbeddingMap:
    """Choose every vector, both scan directions, coarse scales first.

    Each member's candidate list starts one longer than its exclusion set and
    doubles on exhaustion; PackingExhausted propagates with the blocked
    (k, color, j) when the whole lattice is excluded. Deterministic: identical
    inputs reproduce identical assignments.
    """
    levels = tuple(sorted(levels, key=lambda level: level.k))
    if space.n <= 1 or not levels:
        empty_params = params.with_chi(0) if params is not None else None
        return EmbeddingMap(
            space=space,
            params=empty_params,
            ladder=ladder,
            levels=levels,
            assignments={},
            dimension_n=0,
        )

    chi = max(max(level.color.values()) for level in levels)
    params = params.with_chi(chi)
    emb = EmbeddingMap(
        space=space,
        params=params,
        ladder=ladder,
        levels=levels,
        assignments={},
        dimension_n=2 * chi * params.m,
    )
    pool = _LatticeBall(params.tau, params.m)
    margin = 3.0 * params.tau ** 3
    for direction in DIRECTIONS:
        for color in range(1, chi + 1):
            for level in levels:
                for j in _ordered_members(level, color, direction):
                    excluded = forbidden_centers(emb, level.k, color, j, direction)
                    need = len(excluded) + 1
                    while True:
                        candidates = pool.first(need)
                        try:
                            chosen = select_vector(candidates, excluded, margin)
                            break
                        except Exhausted:
                            if len(candidates) < need:
                                raise PackingExhausted(
                                    f"candidate lattice exhausted at"
                                    f" (k={level.k}, color={color}, j={j}, {direction});"
                                    f" decrease tau or increase m"
                                ) from None
                            need *= 2
                    emb.assignments[(level.k, color, j, direction)] = chosen
    return emb


def evaluate_component(
    emb: EmbeddingMap, color: int, direction: str, x: int, up_to_k: Optional[int] = None
) -> np.ndarray:
    """Value at x of one (color, direction) block, summed through scale
    up_to_k (the whole ladder when omitted)."""
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    if emb.dimension_n == 0 or emb.params is None:
        return np.zeros(0)
    if up_to_k is None:
        up_to_k = emb.ladder.k_fine
    elif emb.ladder is None or up_to_k not in emb.ladder.radii:
        raise UnknownScale(f"scale {up_to_k} is not on the ladder")
    return _history_values(emb, color, direction, np.array([x]), up_to_k)[0]


def evaluate_running_partial(
    emb: EmbeddingMap, k: int, color: int, direction: str, j: int, x: int
) -> np.ndarray:
    """Value at x of the partial map immediately before j's vector attaches
    at scale k (builder-side path, for cross-checks)."""
    level = emb.level_at(k)
    if j not in level.classes.get(color, ()):
        raise ValueError(f"point {j} is not in color class {color} at scale {k}")
    return _running_values(emb, level, color, direction, j, np.array([x]))[0]


def evaluate(emb: EmbeddingMap, x: int) -> np.ndarray:
    """Full image of point x: forward then reverse block for each color."""
    if emb.dimension_n == 0:
        return np.zeros(0)
    blocks = [
        evaluate_component(emb, color, direction, x)
        for color in range(1, emb.chi + 1)
        for direction in DIRECTIONS
    ]
    return np.concatenate(blocks)


def coordinates_matrix(emb: EmbeddingMap) -> np.ndarray:
    """Images of all points as rows, in evaluate()'s block layout."""
    if emb.dimension_n == 0:
        return np.zeros((emb.space.n, 0))
    pts = np.arange(emb.space.n)
    blocks = [
        _history_values(emb, color, direction, pts, emb.ladder.k_fine)
        for color in range(1, emb.chi + 1)
        for direction in DIRECTIONS
    ]
    return np.hstack(blocks)
