# main.py - Command-line entry point: routing runs and the standalone sub-tools
import argparse
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, List, Optional

from pydantic import BaseModel

from congroute.config import load_run_config
from congroute.cuts.oracle import AUTO, DEFAULT_SIZE_BOUND, ORACLE_MODES, CutOracle
from congroute.decomposition.welllinked import decompose_bounded
from congroute.errors import EXIT_MALFORMED, EXIT_OK, MalformedInputError, RoutingError
from congroute.expander.krv import DEFAULT_GAMES, EXPANDER_THRESHOLD, PLAYERS, RANDOM_PLAYER, edge_expansion, krv_harness
from congroute.family.params import ParamConstants, ParamTable
from congroute.graph.io import read_demands, read_graph
from congroute.graph.models import Path as GraphPath
from congroute.instances.models import Instance
from congroute.monitoring import StageMonitor
from congroute.pipeline import run_pipeline
from congroute.routing.greedy import greedy_route
from congroute.routing.verify import verify_routing
from congroute.schemas import DecompositionReport, RunReport, rounded

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

logger = logging.getLogger(__name__)


def configure_logging() -> None:
    log_level = os.getenv("LOG_LEVEL", "INFO").upper()
    if log_level not in LOG_LEVELS:
        log_level = "INFO"
    logging.basicConfig(
        level=getattr(logging, log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _emit(report: BaseModel, output: Optional[str]) -> None:
    text = report.model_dump_json(indent=2)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Report written to {output}")
    else:
        sys.stdout.write(text + "\n")


def _read_set(path: str) -> List[int]:
    try:
        return [int(x) for x in Path(path).read_text(encoding="utf-8").split()]
    except ValueError:
        raise MalformedInputError(f"{path}: vertex set must hold whitespace-separated integers") from None


def cmd_route(args: argparse.Namespace) -> int:
    cfg = load_run_config(args)
    report = run_pipeline(cfg, StageMonitor(timings=cfg.timings))
    _emit(report, cfg.output)
    routed = len(report.routed)
    logger.info(f"✅ Routed {routed} pairs with congestion {report.histogram.max_load}")
    return EXIT_OK


def cmd_krv_game(args: argparse.Namespace) -> int:
    report = krv_harness(
        args.n,
        player=args.player,
        games=args.games,
        seed=args.seed,
        rounds=args.rounds,
        c_gamma=args.c_gamma,
    )
    _emit(report, args.output)
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace) -> int:
    g = read_graph(args.graph)
    subset = g.check_vertices(_read_set(args.set))
    out_size = len(g.out_edges(subset))
    k = args.k if args.k is not None else out_size
    overrides = {}
    if args.alpha is not None:
        overrides["alpha"] = Fraction(args.alpha)
    if args.gamma is not None:
        overrides["gamma"] = args.gamma
    params = ParamTable.for_k(max(k, 1), ParamConstants(), overrides)
    result = decompose_bounded(g, subset, k, params, CutOracle(args.cut_oracle, args.size_bound))
    report = DecompositionReport(
        set_size=len(subset),
        out_size=out_size,
        k=k,
        alpha=rounded(params.alpha),
        gamma=params.gamma,
        clusters=[sorted(c) for c in result.clusters],
        boundary=list(result.boundary),
        total_boundary=result.total_boundary,
        charge_bound=rounded(result.charge_bound),
        bound_held=result.bound_held,
        splits=len(result.cuts),
        certified=result.certified,
    )
    _emit(report, args.output)
    return EXIT_OK


def cmd_route_expander(args: argparse.Namespace) -> int:
    x = read_graph(args.graph)
    pairs = read_demands(args.pairs)
    order = x.sorted_vertices()
    index = {v: i for i, v in enumerate(order)}
    value, exact = edge_expansion(len(order), [(index[a], index[b]) for a, b in x.edges.values()])
    checked = value >= EXPANDER_THRESHOLD
    logger.info(f"Expansion {value:.4f} ({'exact' if exact else 'spectral bound'})")
    result = greedy_route(x, pairs, c_beta=Fraction(str(args.c_beta)), expansion_checked=checked)
    _emit(result.report(x.num_vertices, checked), args.output)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    report = RunReport.model_validate_json(Path(args.report).read_text(encoding="utf-8"))
    inst = Instance(read_graph(args.graph), tuple(read_demands(args.demands)))
    routed = [(tuple(r.pair), GraphPath(tuple(r.vertices), tuple(r.edges))) for r in report.routed]
    verification = verify_routing(inst, routed, limit=args.limit, lp_value=report.lp_value or None)
    _emit(verification, args.output)
    return EXIT_OK


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("graph", help="graph file")
    parser.add_argument("demands", help="demand file")
    parser.add_argument("-o", "--output", help="report path (stdout when omitted)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epsilon", type=float, default=0.05)
    parser.add_argument("--c-beta", type=float, default=1.0)
    parser.add_argument("--c-gamma", "--gamma-const", dest="c_gamma", type=float, default=1.0)
    parser.add_argument("--alpha-arv", type=int)
    parser.add_argument("--retry-budget", type=int, default=200)
    parser.add_argument("--escalation-budget", type=int, default=3)
    parser.add_argument("--cut-oracle", choices=ORACLE_MODES, help=f"default: $CR_CUT_ORACLE or {AUTO}")
    parser.add_argument("--size-bound", type=int, default=DEFAULT_SIZE_BOUND)
    parser.add_argument("--wl-spotchecks", type=int, default=20)
    parser.add_argument("--wl-cluster-spotchecks", type=int, default=10)
    parser.add_argument("--split-samples", type=int, default=10)
    parser.add_argument("--exhaustive-split", action="store_true", help="check every hub pair while splitting off")
    parser.add_argument("--threshold", type=float, default=0.5)
    parser.add_argument("--timings", action="store_true")
    parser.add_argument("--override", action="append", metavar="NAME=VALUE", help="fix a derived parameter")


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="congroute", description="Route demand pairs with congestion at most 14")
    sub = parser.add_subparsers(dest="command", required=True)

    route = sub.add_parser("route", help="run the full routing pipeline")
    _add_run_flags(route)
    route.set_defaults(handler=cmd_route)

    krv = sub.add_parser("krv-game", aliases=["krv-harness"], help="play seeded cut-matching games")
    krv.add_argument("-n", type=int, required=True, help="number of expander vertices (even)")
    krv.add_argument("--player", choices=PLAYERS, default=RANDOM_PLAYER)
    krv.add_argument("--games", type=int, default=DEFAULT_GAMES)
    krv.add_argument("--rounds", type=int)
    krv.add_argument("--seed", type=int, default=0)
    krv.add_argument("--c-gamma", "--gamma-const", dest="c_gamma", type=float, default=1.0)
    krv.add_argument("-o", "--output")
    krv.set_defaults(handler=cmd_krv_game)

    dec = sub.add_parser("decompose", help="well-linked decomposition of a vertex set")
    dec.add_argument("graph")
    dec.add_argument("--set", required=True, help="file with the vertex ids of S")
    dec.add_argument("--k", type=int, help="boundary bound (default |out(S)|)")
    dec.add_argument("--alpha", help="well-linkedness parameter, e.g. 1/4")
    dec.add_argument("--gamma", type=int)
    dec.add_argument("--cut-oracle", choices=ORACLE_MODES, default=AUTO)
    dec.add_argument("--size-bound", type=int, default=DEFAULT_SIZE_BOUND)
    dec.add_argument("-o", "--output")
    dec.set_defaults(handler=cmd_decompose)

    rex = sub.add_parser("route-expander", help="greedy vertex-disjoint routing on an expander")
    rex.add_argument("graph")
    rex.add_argument("pairs")
    rex.add_argument("--c-beta", type=float, default=1.0)
    rex.add_argument("-o", "--output")
    rex.set_defaults(handler=cmd_route_expander)

    ver = sub.add_parser("verify", help="re-check a run report against its instance")
    ver.add_argument("report")
    ver.add_argument("--graph", required=True)
    ver.add_argument("--demands", required=True)
    ver.add_argument("--limit", type=int, default=14)
    ver.add_argument("-o", "--output")
    ver.set_defaults(handler=cmd_verify)
    return parser.parse_args(argv)


def run_cli(handler: Callable[[argparse.Namespace], int], args: argparse.Namespace) -> int:
    """Run one sub-command and map failures to exit codes; failures write no report"""
    try:
        return handler(args)
    except RoutingError as e:
        logger.error(f"❌ {e.stage or args.command}: {e.message}")
        return e.exit_code
    except (OSError, ValueError) as e:
        logger.error(f"❌ {args.command}: {e}")
        return EXIT_MALFORMED


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    args = _parse_args(argv)
    return run_cli(args.handler, args)


if __name__ == "__main__":
    sys.exit(main())
