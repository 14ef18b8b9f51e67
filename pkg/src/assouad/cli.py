"""Command-line interface.

Subcommands: embed (build and optionally certify), verify (recheck a stored
embedding), generate (write an instance file). Exit status follows the
pipeline contract; ASSOUAD_SEED overrides the seed of random instances.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .errors import MetricError
from .instances import parse_generator_spec, random_instance, save_instance
from .pipeline import (
    EXIT_METRIC,
    EXIT_OK,
    EXIT_PARAMS,
    RunConfig,
    run_pipeline,
    verify_pipeline,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assouad",
        description="Build and certify snowflake embeddings of finite doubling metric spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser("embed", help="build an embedding, then certify it")
    source = embed.add_mutually_exclusive_group(required=True)
    source.add_argument("--instance", help="instance JSON file")
    source.add_argument(
        "--generate",
        metavar="KIND:PARAMS",
        help="built-in instance, e.g. line:50, grid:10,10, cantor:3, random:100,1",
    )
    embed.add_argument("--alpha", type=float, default=0.8, help="snowflake exponent in (2/3, 1)")
    embed.add_argument("--tau", type=float, help="scale parameter (largest passing value when omitted)")
    embed.add_argument("--c0", type=int, help="doubling constant (probe estimate when omitted)")
    embed.add_argument("--m", type=int, help="block dimension (floor(8*log2(c0)) + 1 when omitted)")
    embed.add_argument("--out", required=True, help="embedding JSON output path")
    embed.add_argument("--report", help="report JSON output path")
    embed.add_argument("--no-verify", action="store_true", help="skip certification")

    verify = sub.add_parser("verify", help="recheck a stored embedding against its instance")
    verify.add_argument("--instance", required=True, help="instance JSON file")
    verify.add_argument("--embedding", required=True, help="embedding JSON file")
    verify.add_argument("--report", required=True, help="report JSON output path")

    generate = sub.add_parser("generate", help="write a built-in instance to a file")
    generate.add_argument("spec", metavar="KIND:PARAMS", help="e.g. grid:10,10 or random:100,1")
    generate.add_argument("--out", required=True, help="instance JSON output path")
    return parser


def _seed_override() -> Optional[int]:
    raw = os.environ.get("ASSOUAD_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        print(f"ASSOUAD_SEED must be an integer, got {raw!r}", file=sys.stderr)
        raise SystemExit(EXIT_PARAMS) from None


def _print_summary(payload: dict, label: str = "built"):
    emb = payload.get("embedding")
    report = payload.get("report")
    if emb is not None:
        params = emb.params
        if params is not None:
            print(
                f"{label}: n={emb.space.n} alpha={params.alpha} tau={params.tau}"
                f" c0={params.c0} m={params.m} chi={emb.chi} dimension={emb.dimension_n}"
            )
        else:
            print(f"{label}: n={emb.space.n} dimension={emb.dimension_n}")
    if report is not None:
        verdict = "pass" if report.passed else f"FAIL ({len(report.violations)} violations)"
        if report.lower_ratio is not None:
            print(
                f"certified: {verdict}; ratio range [{report.lower_ratio:.6g}, {report.upper_ratio:.6g}]"
                f" within bounds [{report.lower_bound:.6g}, {report.upper_bound:.6g}]"
            )
        else:
            print(f"certified: {verdict} (no pairs to check)")
    for key in ("out_path", "report_path"):
        if key in payload:
            print(f"wrote {payload[key]}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "generate":
        seed = _seed_override()
        try:
            if seed is not None:
                kind, _, arg_text = args.spec.partition(":")
                if kind.strip() == "random" and arg_text:
                    space = random_instance(int(arg_text.split(",")[0]), seed)
                else:
                    space = parse_generator_spec(args.spec)
            else:
                space = parse_generator_spec(args.spec)
        except MetricError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_METRIC
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARAMS
        save_instance(space, args.out)
        print(f"wrote {args.out} ({space.n} points)")
        return EXIT_OK

    if args.command == "embed":
        config = RunConfig(
            alpha=args.alpha,
            tau=args.tau,
            c0_override=args.c0,
            m_override=args.m,
            instance_path=args.instance,
            generator_spec=args.generate,
            out_path=args.out,
            report_path=args.report,
            verify=not args.no_verify,
            seed_override=_seed_override(),
        )
        try:
            code, payload = run_pipeline(config)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARAMS
        if "error" in payload:
            print(f"error: {payload['error']}", file=sys.stderr)
        _print_summary(payload)
        return code

    if args.command == "verify":
        code, payload = verify_pipeline(args.instance, args.embedding, args.report)
        if "error" in payload:
            print(f"error: {payload['error']}", file=sys.stderr)
        _print_summary(payload, label="loaded")
        return code

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
