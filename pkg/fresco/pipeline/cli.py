"""Command-line front end: read curve files, run an algorithm, emit JSON.

Exit status is 0 on success, 1 on invalid input, 2 when a candidate set
exceeds its cap and 3 when an internal consistency check fails.
"""

import argparse
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Sequence

from fresco import config
from fresco.center import constant_factor_center, refine_center
from fresco.fixtures import (
    doubling_bounded_fixture,
    doubling_unbounded_fixture,
    planted_instance,
)
from fresco.frechet import distance, distance_matrix
from fresco.getters.load_data import read_curves, write_curves
from fresco.median import SampleConfig, constant_factor_median, k_median
from fresco.signatures import delta_signature, simplify
from fresco.summary import solution_report, to_json
from fresco.utils.errors import FrescoError, InvalidInputError

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports problems as InvalidInputError."""

    def error(self, message: str) -> None:
        raise InvalidInputError(message)


def _add_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="curve file (CSV or JSON)")
    parser.add_argument("--format", choices=["auto", "csv", "json"], default="auto")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--threads", type=int, help="worker cap for parallel kernels")


def _dist(args: argparse.Namespace) -> Dict[str, Any]:
    ids, curves = read_curves(args.input, args.format)
    if len(curves) == 2:
        return {"distance": distance(*curves)}
    return {"ids": ids, "distances": distance_matrix(curves, threads=args.threads)}


def _per_curve(
    ids: Sequence[str], items: List[Dict[str, Any]], plural: str
) -> Dict[str, Any]:
    if len(items) == 1:
        return items[0]
    return {plural: [{"id": i, **item} for i, item in zip(ids, items)]}


def _signature(args: argparse.Namespace) -> Dict[str, Any]:
    if not args.delta > 0:
        raise InvalidInputError("--delta must be a positive number")
    ids, curves = read_curves(args.input, args.format)
    items = [{"signature": list(delta_signature(c, args.delta))} for c in curves]
    return _per_curve(ids, items, "signatures")


def _simplify(args: argparse.Namespace) -> Dict[str, Any]:
    ids, curves = read_curves(args.input, args.format)
    items = []
    for curve in curves:
        simplified = simplify(curve, args.ell)
        items.append(
            {"simplification": list(simplified), "error": distance(curve, simplified)}
        )
    return _per_curve(ids, items, "simplifications")


def _cluster(args: argparse.Namespace) -> Dict[str, Any]:
    ids, curves = read_curves(args.input, args.format)
    started = time.perf_counter()
    if args.objective == "center":
        if args.mode == "constant":
            solution, _ = constant_factor_center(curves, args.k, args.ell, args.threads)
        else:
            epsilon = args.epsilon
            if epsilon is None:
                epsilon = config.get("center").get("epsilon")
            solution = refine_center(
                curves, args.k, args.ell, epsilon, args.max_candidates, args.threads
            )
    elif args.mode == "constant":
        solution, _ = constant_factor_median(curves, args.k, args.ell, args.threads)
    else:
        cfg = SampleConfig(args.epsilon, args.lam, args.ell, args.seed, args.repeats)
        solution = k_median(
            curves, args.k, args.ell, cfg, args.max_candidates, args.threads
        )
    runtime_ms = (time.perf_counter() - started) * 1000
    solution.check(curves, args.ell)
    return solution_report(solution, ids, args.k, args.ell, args.seed, runtime_ms)


def _gen_fixtures(args: argparse.Namespace) -> Optional[Dict[str, Any]]:
    if args.kind == "planted":
        curves, centers, _ = planted_instance(
            args.k, args.ell, args.n, args.m, args.radius, args.separation, args.seed
        )
        if args.centers_output:
            write_curves(
                [f"c{j}" for j in range(len(centers))],
                centers,
                args.centers_output,
                args.output_format,
            )
    elif args.kind == "doubling-unbounded":
        curves, _ = doubling_unbounded_fixture(args.d)
    else:
        curves = doubling_bounded_fixture(args.d, args.ell)
    ids = [f"s{i}" for i in range(len(curves))]
    text = write_curves(ids, curves, fmt=args.output_format)
    _emit(text, args.output)
    return None


def build_parser() -> argparse.ArgumentParser:
    """Parser for every subcommand."""
    parser = _Parser(prog="fresco", description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest="command", required=True)

    dist = subparsers.add_parser("dist", help="exact Fréchet distances")
    _add_input(dist)
    _add_common(dist)
    dist.set_defaults(handler=_dist)

    signature = subparsers.add_parser("signature", help="delta-signatures")
    _add_input(signature)
    _add_common(signature)
    signature.add_argument("--delta", type=float, required=True)
    signature.set_defaults(handler=_signature)

    simplification = subparsers.add_parser("simplify", help="l-vertex simplifications")
    _add_input(simplification)
    _add_common(simplification)
    simplification.add_argument("--ell", type=int, required=True)
    simplification.set_defaults(handler=_simplify)

    cluster = subparsers.add_parser(
        "cluster", help="(k, l)-center or median clustering"
    )
    _add_input(cluster)
    _add_common(cluster)
    cluster.add_argument("--objective", choices=["center", "median"], default="center")
    cluster.add_argument("--mode", choices=["constant", "refine"], default="refine")
    cluster.add_argument("--k", type=int, required=True)
    cluster.add_argument("--ell", type=int, required=True)
    cluster.add_argument("--epsilon", type=float)
    cluster.add_argument("--lambda", dest="lam", type=float)
    cluster.add_argument("--repeats", type=int)
    cluster.add_argument("--seed", type=int, default=config.get("median").get("seed"))
    cluster.add_argument("--max-candidates", type=int)
    cluster.set_defaults(handler=_cluster)

    fixtures = subparsers.add_parser("gen-fixtures", help="write a test curve family")
    _add_common(fixtures)
    fixtures.add_argument(
        "--kind",
        choices=["planted", "doubling-unbounded", "doubling-bounded"],
        default="planted",
    )
    fixtures.add_argument("--output-format", choices=["csv", "json"], default="csv")
    fixtures.add_argument("--centers-output", help="also write planted centers here")
    fixtures.add_argument("--k", type=int, default=1)
    fixtures.add_argument("--ell", type=int, default=4)
    fixtures.add_argument("--n", type=int, default=20)
    fixtures.add_argument("--m", type=int, default=8)
    fixtures.add_argument("--d", type=int, default=1)
    fixtures.add_argument("--radius", type=float)
    fixtures.add_argument("--separation", type=float)
    fixtures.add_argument("--seed", type=int)
    fixtures.set_defaults(handler=_gen_fixtures)
    return parser


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        try:
            with open(output, "w", encoding="utf-8") as file:
                file.write(text)
        except OSError as exc:
            raise InvalidInputError(f"Cannot write {output}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit status.

    Args:
        argv: sequence of str, arguments without the program name.

    Returns:
        int, 0 on success or the exit code of the raised FrescoError.

    Raises:
        Exception: any other failure, after logging it with its traceback.
    """
    try:
        args = build_parser().parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise InvalidInputError("--threads must be at least 1")
        report = args.handler(args)
        if report is not None:
            _emit(to_json(report), args.output)
    except FrescoError as exc:
        logger.debug(f"{type(exc).__name__}: {exc}")
        print(f"fresco: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        raise
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
