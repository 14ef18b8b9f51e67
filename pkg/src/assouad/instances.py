"""Test instance generation and instance file I/O.

Instances are finite subsets of the plane (or an explicit distance matrix),
capped at 500 points so exhaustive pairwise certification stays cheap.
"""
from __future__ import annotations

import json
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidMatrix, SizeOutOfRange
from .metric import FiniteMetricSpace, validate_metric

MAX_POINTS = 500

GENERATORS = ("line", "grid", "cantor", "random")


def _check_size(n: int):
    if not 1 <= n <= MAX_POINTS:
        raise SizeOutOfRange(f"instance size must lie in [1, {MAX_POINTS}], got {n}")


def euclidean_matrix(coords: np.ndarray) -> np.ndarray:
    """Exact-symmetric distance matrix of the rows of coords.

    Each entry is computed once per unordered pair and mirrored, so the
    validator's exact symmetry test holds by construction.
    """
    n = len(coords)
    dist = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    diffs = coords[iu[0]] - coords[iu[1]]
    vals = np.sqrt((diffs * diffs).sum(axis=1))
    dist[iu] = vals
    dist[(iu[1], iu[0])] = vals
    return dist


def space_from_coords(coords: np.ndarray, point_ids: Optional[Sequence] = None) -> FiniteMetricSpace:
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2:
        raise InvalidMatrix(f"coordinates must be a 2d array, got shape {coords.shape}")
    return validate_metric(euclidean_matrix(coords), point_ids=point_ids, coords=coords)


def line_instance(n: int) -> FiniteMetricSpace:
    """Integer points 0, 1, ..., n-1 on the x axis."""
    _check_size(n)
    coords = np.zeros((n, 2))
    coords[:, 0] = np.arange(n)
    return space_from_coords(coords)


def grid_instance(width: int, height: int) -> FiniteMetricSpace:
    """Unit grid of width * height points, row-major order."""
    _check_size(width * height)
    if width < 1 or height < 1:
        raise SizeOutOfRange(f"grid sides must be positive, got {width}x{height}")
    ys, xs = np.divmod(np.arange(width * height), width)
    return space_from_coords(np.column_stack([xs, ys]).astype(float))


def cantor_instance(levels: int) -> FiniteMetricSpace:
    """Endpoints of the level-`levels` middle-thirds construction on [0, 1].

    2**(levels + 1) points; every coordinate is an integer multiple of
    3**(-levels), so distances are exact ratios of integers.
    """
    if levels < 0:
        raise SizeOutOfRange(f"levels must be nonnegative, got {levels}")
    _check_size(2 ** (levels + 1))
    intervals = [(0, 1)]
    for _ in range(levels):
        nxt = []
        for a, b in intervals:
            third = (b - a) // 3 if (b - a) % 3 == 0 else None
            a3, b3 = a * 3, b * 3
            span = b3 - a3
            nxt.append((a3, a3 + span // 3))
            nxt.append((b3 - span // 3, b3))
        intervals = nxt
    denom = 3 ** levels
    ends = sorted({a for a, _ in intervals} | {b for _, b in intervals})
    coords = np.zeros((len(ends), 2))
    coords[:, 0] = np.array(ends, dtype=float) / denom
    return space_from_coords(coords)


def random_instance(n: int, seed: int = 0) -> FiniteMetricSpace:
    """n points drawn uniformly from the unit square, reproducible by seed."""
    _check_size(n)
    rng = np.random.default_rng(seed)
    return space_from_coords(rng.random((n, 2)))


def generate_instance(kind: str, **params) -> FiniteMetricSpace:
    if kind == "line":
        return line_instance(int(params["n"]))
    if kind == "grid":
        return grid_instance(int(params["width"]), int(params["height"]))
    if kind == "cantor":
        return cantor_instance(int(params["levels"]))
    if kind == "random":
        return random_instance(int(params["n"]), int(params.get("seed", 0)))
    raise ValueError(f"unknown generator {kind!r}; choose from {GENERATORS}")


def parse_generator_spec(spec: str) -> FiniteMetricSpace:
    """Build an instance from a spec string like 'grid:10,10' or 'random:100,3'.

    Forms: line:N, grid:W,H, cantor:LEVELS, random:N[,SEED].
    """
    kind, _, arg_text = spec.partition(":")
    kind = kind.strip()
    if kind not in GENERATORS:
        raise ValueError(f"unknown generator {kind!r}; choose from {GENERATORS}")
    try:
        args = [int(part) for part in arg_text.split(",")] if arg_text else []
    except ValueError:
        raise ValueError(f"generator arguments must be integers, got {arg_text!r}") from None
    if kind == "line" and len(args) == 1:
        return line_instance(args[0])
    if kind == "grid" and len(args) == 2:
        return grid_instance(args[0], args[1])
    if kind == "cantor" and len(args) == 1:
        return cantor_instance(args[0])
    if kind == "random" and len(args) in (1, 2):
        return random_instance(args[0], args[1] if len(args) == 2 else 0)
    raise ValueError(f"bad argument count for {kind!r} in spec {spec!r}")


def space_to_json_dict(space: FiniteMetricSpace) -> dict:
    doc = {"points": [str(pid) for pid in space.point_ids]}
    if space.coords is not None:
        doc["metric"] = "euclidean"
        doc["coords"] = [list(map(float, row)) for row in space.coords]
    else:
        doc["metric"] = "matrix"
        doc["matrix"] = [list(map(float, row)) for row in space.dist]
    return doc


def space_from_json_dict(doc: dict) -> FiniteMetricSpace:
    points = doc.get("points")
    metric = doc.get("metric", "matrix")
    if metric == "euclidean":
        coords = np.asarray(doc["coords"], dtype=float)
        _check_size(len(coords))
        return space_from_coords(coords, point_ids=points)
    if metric == "matrix":
        matrix = np.asarray(doc["matrix"], dtype=float)
        if matrix.ndim != 2:
            raise InvalidMatrix(f"matrix must be 2d, got shape {matrix.shape}")
        _check_size(len(matrix))
        return validate_metric(matrix, point_ids=points)
    raise InvalidMatrix(f"unknown metric kind {metric!r}")


def save_instance(space: FiniteMetricSpace, path: str):
    with open(path, "w") as handle:
        json.dump(space_to_json_dict(space), handle, indent=2)
        handle.write("\n")


def load_instance(path: str) -> FiniteMetricSpace:
    with open(path) as handle:
        return space_from_json_dict(json.load(handle))
