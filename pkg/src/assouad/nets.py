"""Scale ladder, separated nets, and greedy coloring.

Each scale k carries radius r_k = tau**(2k). The ladder runs from the
coarsest scale (radius at least the diameter) down to the first scale whose
quadrupled radius is below the minimum separation; finer scales cannot
distinguish any pair, so the ladder stops there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import BadTau, TooFewPoints
from .metric import FiniteMetricSpace, extremes


@dataclass(frozen=True)
class ScaleLadder:
    """Geometric radius ladder r_k = tau**(2k) for k_coarse <= k <= k_fine."""

    tau: float
    k_coarse: int
    k_fine: int
    radii: Dict[int, float]

    def scales(self) -> range:
        return range(self.k_coarse, self.k_fine + 1)

    def radius(self, k: int) -> float:
        return self.radii[k]


@dataclass(frozen=True)
class NetLevel:
    """One scale's net together with its greedy coloring.

    net lists member point indices in admission order (ascending index);
    color maps each member to a palette index >= 1; classes groups members
    by color, preserving net order.
    """

    k: int
    r: float
    net: Tuple[int, ...]
    color: Dict[int, int]
    classes: Dict[int, Tuple[int, ...]]


def build_ladder(space: FiniteMetricSpace, tau: float) -> ScaleLadder:
    """Build the scale ladder for a space; requires 0 < tau < 1/2.

    Consecutive radii satisfy radii[k+1] == radii[k] * tau**2 exactly, so
    downstream geometric-series bounds hold as written in floats.
    """
    if not 0 < tau < 0.5:
        raise BadTau(f"tau must lie in (0, 1/2), got {tau}")
    if space.n < 2:
        raise TooFewPoints("a ladder needs at least two points")
    diameter, d_min = extremes(space)

    # Largest k with tau**(2k) >= diameter; fix up float rounding of the log.
    k = int(np.floor(np.log(diameter) / (2.0 * np.log(tau))))
    while tau ** (2 * (k + 1)) >= diameter:
        k += 1
    while tau ** (2 * k) < diameter:
        k -= 1
    k_coarse = k

    radii: Dict[int, float] = {}
    r = tau ** (2 * k_coarse)
    radii[k_coarse] = r
    step = tau * tau
    while not 4.0 * r <= d_min:
        k += 1
        r = r * step
        radii[k] = r
        if k - k_coarse > 100_000:
            raise RuntimeError("ladder did not terminate; degenerate inputs")
    return ScaleLadder(tau=tau, k_coarse=k_coarse, k_fine=k, radii=radii)


def maximal_net(space: FiniteMetricSpace, radius: float) -> Tuple[int, ...]:
    """Greedy maximal radius-separated subset, scanning indices in order.

    A point joins when it is at distance >= radius from everything already
    admitted. Maximality means every point of the space lies within radius
    of some member.
    """
    if radius <= 0:
        raise ValueError(f"net radius must be positive, got {radius}")
    chosen: list[int] = []
    for p in range(space.n):
        if not chosen or (space.dist[p, chosen] >= radius).all():
            chosen.append(p)
    return tuple(chosen)


def neighbor_count(
    space: FiniteMetricSpace, net: Sequence[int], radius: float
) -> tuple[int, Dict[int, int]]:
    """Count net members within 10*radius of each point; return (max, per point)."""
    members = list(net)
    per_point = {
        x: int((space.dist[x, members] <= 10.0 * radius).sum()) for x in range(space.n)
    }
    return max(per_point.values()), per_point


def greedy_color(
    space: FiniteMetricSpace, net: Sequence[int], radius: float, *, k: int = 0
) -> NetLevel:
    """Color net members so same-color members sit more than 10*radius apart.

    First-fit over net order: each member takes the smallest palette index
    unused by earlier members within 10*radius.
    """
    net = tuple(net)
    color: Dict[int, int] = {}
    for idx, j in enumerate(net):
        taken = {
            color[i] for i in net[:idx] if space.dist[i, j] <= 10.0 * radius
        }
        c = 1
        while c in taken:
            c += 1
        color[j] = c
    classes: Dict[int, Tuple[int, ...]] = {}
    for j in net:
        classes.setdefault(color[j], [])
        classes[color[j]].append(j)
    classes = {c: tuple(members) for c, members in classes.items()}
    return NetLevel(k=k, r=float(radius), net=net, color=color, classes=classes)


def build_levels(space: FiniteMetricSpace, ladder: ScaleLadder) -> Tuple[NetLevel, ...]:
    """Net and coloring for every scale of the ladder, coarse to fine."""
    levels = []
    for k in ladder.scales():
        r = ladder.radius(k)
        levels.append(greedy_color(space, maximal_net(space, r), r, k=k))
    return tuple(levels)


def level_dump(levels: Sequence[NetLevel]) -> list[dict]:
    """JSON-ready snapshot of nets and colors, for diagnostics and tests."""
    return [
        {
            "k": level.k,
            "r": level.r,
            "net": list(level.net),
            "color": {str(j): level.color[j] for j in level.net},
        }
        for level in levels
    ]
