"""Construct-and-verify snowflake embeddings of finite doubling metric spaces.

Given a finite metric space, an exponent alpha in (2/3, 1), and a scale
parameter tau, the package builds an explicit map into Euclidean space that
is bilipschitz for the snowflake distance d**alpha, with ambient dimension
depending only on the doubling constant, and certifies the distortion bounds
exhaustively on all pairs.
"""
from .embedding import (
    EmbeddingMap,
    Params,
    build_embedding,
    bump,
    candidate_vectors,
    evaluate,
    evaluate_component,
    forbidden_centers,
    select_vector,
    validate_params,
)
from .errors import (
    AssouadError,
    MetricError,
    PackingError,
    ParamError,
)
from .instances import generate_instance, load_instance, parse_generator_spec, save_instance
from .metric import (
    DoublingEstimate,
    FiniteMetricSpace,
    covering_bound,
    estimate_doubling_constant,
    extremes,
    validate_metric,
)
from .nets import NetLevel, ScaleLadder, build_ladder, build_levels, greedy_color, maximal_net
from .pipeline import RunConfig, full_verification, run_pipeline, verify_pipeline
from .verify import DistortionReport, pairwise_distortion

__version__ = "0.1.0"

__all__ = [
    "AssouadError",
    "DistortionReport",
    "DoublingEstimate",
    "EmbeddingMap",
    "FiniteMetricSpace",
    "MetricError",
    "NetLevel",
    "PackingError",
    "ParamError",
    "Params",
    "RunConfig",
    "ScaleLadder",
    "build_embedding",
    "build_ladder",
    "build_levels",
    "bump",
    "candidate_vectors",
    "covering_bound",
    "estimate_doubling_constant",
    "evaluate",
    "evaluate_component",
    "extremes",
    "forbidden_centers",
    "full_verification",
    "generate_instance",
    "greedy_color",
    "load_instance",
    "maximal_net",
    "pairwise_distortion",
    "parse_generator_spec",
    "run_pipeline",
    "save_instance",
    "select_vector",
    "validate_metric",
    "validate_params",
    "verify_pipeline",
]
