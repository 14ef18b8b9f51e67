"""Certification of a built embedding.

Every bound the construction promises is rechecked here from the distance
matrix and the stored vectors alone, through a matrix-algebra evaluation
path that shares no code with the builder's accumulation loop. Checks report
violations instead of raising, so a report can list everything wrong at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .embedding import DIRECTIONS, EmbeddingMap
from .errors import DimensionMismatch
from .metric import FiniteMetricSpace
from .nets import NetLevel

REL_SLACK = 1e-9

_CHUNK_BYTES = 50_000_000


def _class_matrix(
    space: FiniteMetricSpace, level: NetLevel, color: int, vectors: Dict[tuple, np.ndarray], direction: str
) -> Optional[np.ndarray]:
    """n-by-m contribution of one color class at one scale, via one matmul."""
    members = level.classes.get(color, ())
    if not members:
        return None
    cols = np.array(members)
    phi = np.clip(2.0 - space.dist[:, cols] / level.r, 0.0, 1.0)
    v = np.stack([vectors[(level.k, color, j, direction)] for j in members])
    return phi @ v


def component_values(
    space: FiniteMetricSpace,
    emb: EmbeddingMap,
    color: int,
    direction: str,
    up_to_k: Optional[int] = None,
) -> np.ndarray:
    """All points' values of one (color, direction) block, rows indexed by
    point, summed over scales <= up_to_k (whole ladder when omitted)."""
    out = np.zeros((space.n, emb.params.m))
    for level in emb.levels:
        if up_to_k is not None and level.k > up_to_k:
            break
        block = _class_matrix(space, level, color, emb.assignments, direction)
        if block is not None:
            out += level.r ** emb.params.alpha * block
    return out


def partial_sum_values(
    space: FiniteMetricSpace, emb: EmbeddingMap, k: int, color: int, direction: str, j: int
) -> np.ndarray:
    """All points' values of the partial map just before j's vector attaches:
    everything through scale k-1 plus the scale-k members preceding j."""
    out = component_values(space, emb, color, direction, up_to_k=k - 1)
    level = emb.level_at(k)
    members = list(level.classes.get(color, ()))
    if direction == "reverse":
        members.reverse()
    earlier = members[: members.index(j)]
    if earlier:
        cols = np.array(earlier)
        phi = np.clip(2.0 - space.dist[:, cols] / level.r, 0.0, 1.0)
        v = np.stack([emb.assignments[(k, color, i, direction)] for i in earlier])
        out += level.r ** emb.params.alpha * (phi @ v)
    return out


def check_separation(space: FiniteMetricSpace, emb: EmbeddingMap) -> List[dict]:
    """Recheck the selection guarantee behind every stored vector.

    For each (k, color, j, direction): completed values on the radius ball
    around j must clear the running partial values on the annulus
    (2*r_k, 10*r_k/tau**2] by 3*tau**3*r_k**alpha, up to relative slack.
    """
    violations: List[dict] = []
    if emb.dimension_n == 0:
        return violations
    tau = emb.params.tau
    for direction in DIRECTIONS:
        for color in range(1, emb.chi + 1):
            for level in emb.levels:
                members = list(level.classes.get(color, ()))
                if direction == "reverse":
                    members.reverse()
                for j in members:
                    row = space.dist[:, j]
                    inner = np.flatnonzero(row <= level.r)
                    reach = 10.0 * level.r / (tau * tau)
                    annulus = np.flatnonzero((row > 2.0 * level.r) & (row <= reach))
                    if inner.size == 0 or annulus.size == 0:
                        continue
                    running = partial_sum_values(space, emb, level.k, color, direction, j)
                    v = emb.assignments[(level.k, color, j, direction)]
                    scale = level.r ** emb.params.alpha
                    completed = running + scale * np.outer(
                        np.clip(2.0 - row / level.r, 0.0, 1.0), v
                    )
                    gaps = np.linalg.norm(
                        completed[inner][:, None, :] - running[annulus][None, :, :], axis=2
                    )
                    floor = 3.0 * tau ** 3 * scale * (1.0 - REL_SLACK)
                    bad = np.argwhere(gaps < floor)
                    for a, b in bad:
                        violations.append(
                            {
                                "check": "separation",
                                "k": level.k,
                                "color": color,
                                "direction": direction,
                                "j": int(j),
                                "x": int(inner[a]),
                                "y": int(annulus[b]),
                                "gap": float(gaps[a, b]),
                                "floor": float(floor),
                            }
                        )
    violations.sort(key=lambda rec: rec["gap"] - rec["floor"])
    return violations


def _chunked_pair_norms(values: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Norms of values[rows[t]] - values[cols[t]], chunked to bound memory."""
    total = len(rows)
    width = max(values.shape[1], 1)
    step = max(_CHUNK_BYTES // (8 * width), 1)
    out = np.empty(total)
    for start in range(0, total, step):
        stop = min(start + step, total)
        out[start:stop] = np.linalg.norm(
            values[rows[start:stop]] - values[cols[start:stop]], axis=1
        )
    return out


def check_lipschitz_levels(space: FiniteMetricSpace, emb: EmbeddingMap) -> List[dict]:
    """Each truncated block must be r_k**(alpha-1)-Lipschitz on all pairs."""
    violations: List[dict] = []
    if emb.dimension_n == 0:
        return violations
    rows, cols = np.triu_indices(space.n, k=1)
    dist = space.dist[rows, cols]
    for direction in DIRECTIONS:
        for color in range(1, emb.chi + 1):
            partial = np.zeros((space.n, emb.params.m))
            for level in emb.levels:
                block = _class_matrix(space, level, color, emb.assignments, direction)
                if block is not None:
                    partial = partial + level.r ** emb.params.alpha * block
                ceiling = level.r ** (emb.params.alpha - 1.0) * dist * (1.0 + REL_SLACK)
                norms = _chunked_pair_norms(partial, rows, cols)
                bad = np.flatnonzero(norms > ceiling)
                for t in bad:
                    violations.append(
                        {
                            "check": "lipschitz",
                            "k": level.k,
                            "color": color,
                            "direction": direction,
                            "x": int(rows[t]),
                            "y": int(cols[t]),
                            "norm": float(norms[t]),
                            "ceiling": float(ceiling[t]),
                        }
                    )
    violations.sort(key=lambda rec: rec["ceiling"] - rec["norm"])
    return violations


def check_tail_and_sup(space: FiniteMetricSpace, emb: EmbeddingMap) -> List[dict]:
    """Sup bound per scale and geometric tail bound per truncation.

    Each single-scale layer stays under tau**2 in sup norm, and cutting the
    ladder after scale k discards at most 2 * tau**2 * r_{k+1}**alpha.
    """
    violations: List[dict] = []
    if emb.dimension_n == 0:
        return violations
    tau2 = emb.params.tau ** 2
    for direction in DIRECTIONS:
        for color in range(1, emb.chi + 1):
            layers = []
            for level in emb.levels:
                block = _class_matrix(space, level, color, emb.assignments, direction)
                if block is None:
                    block = np.zeros((space.n, emb.params.m))
                layers.append(block)
                sup = float(np.linalg.norm(block, axis=1).max())
                if sup > tau2 * (1.0 + REL_SLACK):
                    violations.append(
                        {
                            "check": "sup",
                            "k": level.k,
                            "color": color,
                            "direction": direction,
                            "sup": sup,
                            "ceiling": tau2,
                        }
                    )
            tail = np.zeros((space.n, emb.params.m))
            for idx in range(len(emb.levels) - 1, 0, -1):
                level = emb.levels[idx]
                tail = tail + level.r ** emb.params.alpha * layers[idx]
                sup = float(np.linalg.norm(tail, axis=1).max())
                ceiling = 2.0 * tau2 * level.r ** emb.params.alpha
                if sup > ceiling * (1.0 + REL_SLACK):
                    violations.append(
                        {
                            "check": "tail",
                            "k": emb.levels[idx - 1].k,
                            "color": color,
                            "direction": direction,
                            "sup": sup,
                            "ceiling": ceiling,
                        }
                    )
    violations.sort(key=lambda rec: rec["ceiling"] - rec["sup"])
    return violations


def check_net_invariants(
    space: FiniteMetricSpace, levels: Sequence[NetLevel], c0: Optional[int] = None
) -> List[dict]:
    """Net and coloring structure at every scale.

    Checks: net points pairwise >= r_k apart; every point within r_k of some
    net point; same-color members pairwise > 10*r_k apart; at most one
    same-color member within 2*r_k of any point (disjoint cutoff supports);
    and, when c0 is given, no more than c0**5 colors in use.
    """
    violations: List[dict] = []
    for level in levels:
        net = np.array(level.net)
        sub = space.dist[np.ix_(net, net)]
        off = sub[np.triu_indices(len(net), k=1)]
        if off.size and off.min() < level.r * (1.0 - REL_SLACK):
            violations.append(
                {"check": "net-separation", "k": level.k, "min_gap": float(off.min()), "floor": level.r}
            )
        cover = space.dist[:, net].min(axis=1)
        if cover.max() > level.r * (1.0 + REL_SLACK):
            violations.append(
                {"check": "net-covering", "k": level.k, "max_gap": float(cover.max()), "ceiling": level.r}
            )
        for color, members in level.classes.items():
            pts = np.array(members)
            gaps = space.dist[np.ix_(pts, pts)][np.triu_indices(len(pts), k=1)]
            if gaps.size and gaps.min() <= 10.0 * level.r * (1.0 - REL_SLACK):
                violations.append(
                    {
                        "check": "color-separation",
                        "k": level.k,
                        "color": color,
                        "min_gap": float(gaps.min()),
                        "floor": 10.0 * level.r,
                    }
                )
            near = (space.dist[:, pts] < 2.0 * level.r).sum(axis=1)
            if near.max() > 1:
                violations.append(
                    {
                        "check": "support-overlap",
                        "k": level.k,
                        "color": color,
                        "point": int(near.argmax()),
                        "count": int(near.max()),
                    }
                )
        if c0 is not None:
            used = max(level.color.values(), default=0)
            if used > c0 ** 5:
                violations.append(
                    {"check": "palette", "k": level.k, "colors": used, "ceiling": int(c0 ** 5)}
                )
    return violations


@dataclass
class DistortionReport:
    """Outcome of the exhaustive pairwise distortion check.

    Ratios are |F(x) - F(y)| / d(x, y)**alpha; the certificate holds when the
    worst ratios stay inside [lower_bound, upper_bound] up to relative slack
    and no structural check was violated.
    """

    lower_ratio: Optional[float]
    upper_ratio: Optional[float]
    lower_bound: Optional[float]
    upper_bound: Optional[float]
    worst_pairs: List[dict] = field(default_factory=list)
    violations: List[dict] = field(default_factory=list)
    pair_scales: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "lower_ratio": self.lower_ratio,
            "upper_ratio": self.upper_ratio,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "pass": self.passed,
            "worst_pairs": self.worst_pairs,
            "violations": self.violations,
        }


def pairwise_distortion(
    space: FiniteMetricSpace, emb: EmbeddingMap, alpha: float
) -> DistortionReport:
    """Certify two-sided distortion bounds on every pair of points.

    Lower bound tau**5 / 8, upper bound 5 * N * tau**(-2*(1-alpha)) with N
    the ambient dimension. Also records, per pair, the coarsest scale k with
    4 * r_k <= d(x, y), the scale whose selection margin protects the pair.
    """
    if space.n < 2:
        return DistortionReport(
            lower_ratio=None, upper_ratio=None, lower_bound=None, upper_bound=None
        )
    if emb.dimension_n:
        blocks = [
            component_values(space, emb, color, direction)
            for color in range(1, emb.chi + 1)
            for direction in DIRECTIONS
        ]
        images = np.hstack(blocks)
    else:
        images = np.zeros((space.n, 0))
    if images.shape[1] != emb.dimension_n:
        raise DimensionMismatch(
            f"expected dimension {emb.dimension_n}, assembled {images.shape[1]}"
        )
    tau = emb.params.tau
    lower_bound = tau ** 5 / 8.0
    upper_bound = 5.0 * emb.dimension_n * tau ** (-2.0 * (1.0 - alpha))

    rows, cols = np.triu_indices(space.n, k=1)
    dist = space.dist[rows, cols]
    norms = _chunked_pair_norms(images, rows, cols)
    ratios = norms / dist ** alpha

    pair_scales: Dict[Tuple[int, int], int] = {}
    if emb.levels:
        radii = np.array([level.r for level in emb.levels])
        ks = np.array([level.k for level in emb.levels])
        idx = np.argmax(4.0 * radii[None, :] <= dist[:, None], axis=1)
        fits = 4.0 * radii[idx] <= dist
        for t in np.flatnonzero(fits):
            pair_scales[(int(rows[t]), int(cols[t]))] = int(ks[idx[t]])

    violations: List[dict] = []
    low_floor = lower_bound * (1.0 - REL_SLACK)
    high_ceiling = upper_bound * (1.0 + REL_SLACK)
    for t in np.flatnonzero(ratios < low_floor):
        violations.append(
            {
                "check": "distortion-lower",
                "x": int(rows[t]),
                "y": int(cols[t]),
                "ratio": float(ratios[t]),
                "bound": lower_bound,
            }
        )
    for t in np.flatnonzero(ratios > high_ceiling):
        violations.append(
            {
                "check": "distortion-upper",
                "x": int(rows[t]),
                "y": int(cols[t]),
                "ratio": float(ratios[t]),
                "bound": upper_bound,
            }
        )

    order = np.argsort(ratios)
    worst: List[dict] = []
    for t in order[:3]:
        worst.append(
            {
                "x": int(rows[t]),
                "y": int(cols[t]),
                "ratio": float(ratios[t]),
                "side": "lower",
            }
        )
    for t in order[::-1][:3]:
        worst.append(
            {
                "x": int(rows[t]),
                "y": int(cols[t]),
                "ratio": float(ratios[t]),
                "side": "upper",
            }
        )
    return DistortionReport(
        lower_ratio=float(ratios.min()),
        upper_ratio=float(ratios.max()),
        lower_bound=lower_bound,
        upper_bound=upper_bound,
        worst_pairs=worst,
        violations=violations,
        pair_scales=pair_scales,
    )
