"""End-to-end orchestration: instance -> parameters -> build -> certify.

Also owns the embedding and report file formats and the exit status contract:
0 built and verified (or verification skipped), 2 parameter rejection,
3 metric rejection, 4 candidate lattice exhausted, 5 verification failure.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .embedding import EmbeddingMap, build_embedding, coordinates_matrix, validate_params
from .errors import MetricError, PackingError, ParamError, TauTooLarge
from .instances import load_instance, parse_generator_spec, random_instance
from .metric import FiniteMetricSpace, estimate_doubling_constant
from .nets import build_ladder, build_levels
from .verify import (
    REL_SLACK,
    DistortionReport,
    check_lipschitz_levels,
    check_net_invariants,
    check_separation,
    check_tail_and_sup,
    component_values,
    pairwise_distortion,
)

EXIT_OK = 0
EXIT_PARAMS = 2
EXIT_METRIC = 3
EXIT_PACKING = 4
EXIT_VERIFY = 5


@dataclass
class RunConfig:
    alpha: float = 0.8
    tau: Optional[float] = None
    c0_override: Optional[int] = None
    m_override: Optional[int] = None
    instance_path: Optional[str] = None
    generator_spec: Optional[str] = None
    out_path: Optional[str] = None
    report_path: Optional[str] = None
    verify: bool = True
    seed_override: Optional[int] = None


def tau_ladder():
    """Candidate tau values 0.1, 0.05, 0.02, 0.01, ... (descending)."""
    for exponent in range(1, 16):
        yield float(f"1e-{exponent}")
        yield float(f"5e-{exponent + 1}")
        yield float(f"2e-{exponent + 1}")


def auto_m(c0: int) -> int:
    """Smallest integer dimension passing the m > 8*log2(c0) gate."""
    return math.floor(8.0 * math.log2(c0)) + 1


def auto_tau(alpha: float, c0: int, m: int) -> float:
    """Largest ladder value passing the parameter gate.

    Only tau-related rejections advance the search; alpha or dimension
    problems cannot be fixed by shrinking tau and propagate immediately.
    """
    for tau in tau_ladder():
        try:
            validate_params(alpha, tau, c0, m)
            return tau
        except TauTooLarge:
            continue
    raise TauTooLarge(f"no ladder value passes the gate for alpha={alpha}")


def _load_space(config: RunConfig) -> FiniteMetricSpace:
    if config.instance_path:
        return load_instance(config.instance_path)
    if config.generator_spec:
        spec = config.generator_spec
        if config.seed_override is not None:
            kind, _, arg_text = spec.partition(":")
            if kind.strip() == "random" and arg_text:
                n = int(arg_text.split(",")[0])
                return random_instance(n, config.seed_override)
        return parse_generator_spec(spec)
    raise ValueError("config needs an instance path or a generator spec")


def full_verification(
    space: FiniteMetricSpace, emb: EmbeddingMap, c0: Optional[int] = None
) -> DistortionReport:
    """Run every certification check and merge the findings into one report."""
    alpha = emb.params.alpha if emb.params is not None else 0.0
    report = pairwise_distortion(space, emb, alpha) if space.n >= 2 else DistortionReport(
        lower_ratio=None, upper_ratio=None, lower_bound=None, upper_bound=None
    )
    structural = check_net_invariants(space, emb.levels, c0)
    structural += check_separation(space, emb)
    structural += check_lipschitz_levels(space, emb)
    structural += check_tail_and_sup(space, emb)
    report.violations = structural + report.violations
    return report


def embedding_to_json_dict(emb: EmbeddingMap) -> dict:
    params = emb.params
    coords = coordinates_matrix(emb)
    ladder = emb.ladder.radii if emb.ladder is not None else {}
    records = []
    for rec in emb.assignment_records():
        records.append(
            {
                "k": rec.k,
                "xi": rec.color,
                "j": rec.j,
                "direction": rec.direction,
                "v": [float(c) for c in rec.v],
            }
        )
    return {
        "alpha": params.alpha if params else None,
        "tau": params.tau if params else None,
        "c0": params.c0 if params else None,
        "m": params.m if params else None,
        "chi": emb.chi,
        "dimension_n": emb.dimension_n,
        "ladder": {str(k): float(r) for k, r in ladder.items()},
        "coordinates": {
            str(pid): [float(c) for c in coords[i]] for i, pid in enumerate(emb.space.point_ids)
        },
        "assignments": records,
    }


def embedding_from_json_dict(doc: dict, space: FiniteMetricSpace) -> Tuple[EmbeddingMap, list]:
    """Reattach a stored embedding to its instance.

    The ladder and levels are rebuilt from tau (their construction is
    deterministic) and cross-checked against the stored data; mismatches are
    returned as violation records rather than raised, so a corrupted file
    surfaces as a failed verification.
    """
    problems: list = []
    params = validate_params(doc["alpha"], doc["tau"], doc["c0"], doc["m"])
    chi = int(doc.get("chi", 0))
    params = params.with_chi(chi)
    stored_ladder = {int(k): float(r) for k, r in doc.get("ladder", {}).items()}

    if space.n <= 1 or not stored_ladder:
        emb = EmbeddingMap(
            space=space, params=params, ladder=None, levels=(), assignments={},
            dimension_n=int(doc.get("dimension_n", 0)),
        )
        if doc.get("assignments"):
            problems.append({"check": "structure", "detail": "vectors stored for an empty ladder"})
        return emb, problems

    ladder = build_ladder(space, params.tau)
    if set(stored_ladder) != set(ladder.radii):
        problems.append(
            {
                "check": "structure",
                "detail": f"stored scales {sorted(stored_ladder)} != rebuilt {sorted(ladder.radii)}",
            }
        )
    else:
        for k, r in ladder.radii.items():
            if not math.isclose(stored_ladder[k], r, rel_tol=1e-12, abs_tol=0.0):
                problems.append(
                    {"check": "structure", "detail": f"radius at scale {k}: stored {stored_ladder[k]}, rebuilt {r}"}
                )
    levels = build_levels(space, ladder)

    expected = set()
    for level in levels:
        for color, members in level.classes.items():
            for j in members:
                for direction in ("forward", "reverse"):
                    expected.add((level.k, color, j, direction))
    assignments = {}
    for rec in doc.get("assignments", []):
        key = (int(rec["k"]), int(rec["xi"]), int(rec["j"]), str(rec["direction"]))
        v = np.array(rec["v"], dtype=float)
        if len(v) != params.m:
            problems.append(
                {"check": "structure", "detail": f"vector at {key} has length {len(v)}, expected {params.m}"}
            )
        assignments[key] = v
    if set(assignments) != expected:
        missing = sorted(expected - set(assignments))[:3]
        extra = sorted(set(assignments) - expected)[:3]
        problems.append(
            {"check": "structure", "detail": f"assignment keys disagree; missing {missing}, unexpected {extra}"}
        )
    emb = EmbeddingMap(
        space=space,
        params=params,
        ladder=ladder,
        levels=levels,
        assignments=assignments,
        dimension_n=int(doc.get("dimension_n", 2 * chi * params.m)),
    )
    if emb.dimension_n != 2 * chi * params.m:
        problems.append(
            {
                "check": "structure",
                "detail": f"dimension_n {emb.dimension_n} != 2*chi*m = {2 * chi * params.m}",
            }
        )
    return emb, problems


def _check_stored_coordinates(space: FiniteMetricSpace, emb: EmbeddingMap, doc: dict) -> list:
    stored = doc.get("coordinates", {})
    if emb.dimension_n == 0:
        return []
    blocks = [
        component_values(space, emb, color, direction)
        for color in range(1, emb.chi + 1)
        for direction in ("forward", "reverse")
    ]
    images = np.hstack(blocks)
    problems = []
    for i, pid in enumerate(space.point_ids):
        row = np.array(stored.get(str(pid), []), dtype=float)
        if row.shape != images[i].shape:
            problems.append({"check": "coordinates", "point": str(pid), "detail": "missing or wrong length"})
            continue
        scale = max(np.linalg.norm(images[i]), 1.0)
        err = float(np.linalg.norm(row - images[i]))
        if err > REL_SLACK * scale:
            problems.append(
                {"check": "coordinates", "point": str(pid), "detail": f"stored image off by {err}"}
            )
    return problems


def _dump_json(doc: dict, path: str):
    with open(path, "w") as handle:
        json.dump(doc, handle, indent=2)
        handle.write("\n")


def run_pipeline(config: RunConfig) -> Tuple[int, dict]:
    """Build (and optionally certify) one instance end to end.

    Returns (exit_code, payload); the payload carries the constructed
    objects on success and an "error" message on failure.
    """
    try:
        space = _load_space(config)
    except MetricError as exc:
        return EXIT_METRIC, {"error": str(exc), "stage": "metric"}

    try:
        estimate = None
        if config.c0_override is not None:
            c0 = int(config.c0_override)
        elif space.n >= 2:
            estimate = estimate_doubling_constant(space)
            c0 = estimate.c0
        else:
            c0 = 1
        m = config.m_override if config.m_override is not None else auto_m(c0)
        tau = config.tau if config.tau is not None else auto_tau(config.alpha, c0, m)
        params = validate_params(config.alpha, tau, c0, m)
    except ParamError as exc:
        return EXIT_PARAMS, {"error": str(exc), "stage": "params"}

    try:
        if space.n >= 2:
            ladder = build_ladder(space, params.tau)
            levels = build_levels(space, ladder)
        else:
            ladder = None
            levels = ()
        emb = build_embedding(space, params, ladder, levels)
    except ParamError as exc:
        return EXIT_PARAMS, {"error": str(exc), "stage": "params"}
    except PackingError as exc:
        return EXIT_PACKING, {"error": str(exc), "stage": "packing"}

    report = full_verification(space, emb, params.c0) if config.verify else None

    payload = {
        "space": space,
        "estimate": estimate,
        "params": emb.params,
        "embedding": emb,
        "report": report,
    }
    if config.out_path:
        _dump_json(embedding_to_json_dict(emb), config.out_path)
        payload["out_path"] = config.out_path
    if config.report_path and report is not None:
        _dump_json(report.to_json_dict(), config.report_path)
        payload["report_path"] = config.report_path
    if report is not None and not report.passed:
        payload["error"] = f"verification found {len(report.violations)} violations"
        return EXIT_VERIFY, payload
    return EXIT_OK, payload


def verify_pipeline(instance_path: str, embedding_path: str, report_path: Optional[str]) -> Tuple[int, dict]:
    """Recheck a stored embedding against its instance from the files alone."""
    try:
        space = load_instance(instance_path)
    except MetricError as exc:
        return EXIT_METRIC, {"error": str(exc), "stage": "metric"}
    try:
        with open(embedding_path) as handle:
            doc = json.load(handle)
        emb, problems = embedding_from_json_dict(doc, space)
    except ParamError as exc:
        return EXIT_PARAMS, {"error": str(exc), "stage": "params"}

    if problems:
        report = DistortionReport(
            lower_ratio=None, upper_ratio=None, lower_bound=None, upper_bound=None,
            violations=problems,
        )
    else:
        report = full_verification(space, emb, emb.params.c0 if emb.params else None)
        report.violations = _check_stored_coordinates(space, emb, doc) + report.violations
    payload = {"space": space, "embedding": emb, "report": report}
    if report_path:
        _dump_json(report.to_json_dict(), report_path)
        payload["report_path"] = report_path
    if not report.passed:
        payload["error"] = f"verification found {len(report.violations)} violations"
        return EXIT_VERIFY, payload
    return EXIT_OK, payload
