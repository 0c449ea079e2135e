# pipeline.py - End-to-end routing run: ingest, prepare, build expanders, route, verify, report
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from congroute import __version__
from congroute.config import RunConfig
from congroute.cuts.oracle import CutOracle
from congroute.errors import MalformedInputError, ParameterDegeneracyError, RouteEscalation, StochasticFailure
from congroute.expander.interfaces import group_interfaces
from congroute.expander.krv import EXPANDER_THRESHOLD, krv_build
from congroute.expander.models import EmbeddedExpander
from congroute.expander.trees import build_trees
from congroute.family.params import ParamTable
from congroute.family.search import find_good_family
from congroute.graph.io import read_demands, read_graph
from congroute.graph.models import Path, VertexId
from congroute.instances.models import Instance, SubInstance
from congroute.instances.normalize import normalize
from congroute.instances.partition import lp_solution, partition_flow_well_linked
from congroute.monitoring import StageMonitor
from congroute.routing.fallback import single_pair_route
from congroute.routing.greedy import greedy_route
from congroute.routing.translate import CONGESTION_LIMIT, translate
from congroute.routing.verify import verify_routing
from congroute.schemas import ParamEcho, RoutedPath, RunReport, SubInstanceReport, rounded

logger = logging.getLogger(__name__)

Pair = Tuple[VertexId, VertexId]
Routed = List[Tuple[Pair, Path]]


@dataclass
class SubInstanceOutcome:
    report: SubInstanceReport
    routed: Routed = field(default_factory=list)


def _echo(params: ParamTable, minimal_k: Optional[int]) -> ParamEcho:
    return ParamEcho(
        **params.echo(),
        minimal_k=str(minimal_k) if minimal_k is not None else None,
        degeneracy=params.degeneracy(),
    )


def _fallback(sub: SubInstance, report: SubInstanceReport, reason: str) -> SubInstanceOutcome:
    report.fallback = True
    report.reason = reason
    route = single_pair_route(sub.graph, sub.pairs, reason)
    if route is None:
        return SubInstanceOutcome(report)
    report.routed = 1
    return SubInstanceOutcome(report, [(route.pair, route.path)])


def _build_expander(
    sub: SubInstance,
    params: ParamTable,
    cfg: RunConfig,
    rng: np.random.Generator,
    oracle: CutOracle,
    monitor: StageMonitor,
    report: SubInstanceReport,
) -> Tuple[EmbeddedExpander, Tuple[Pair, ...]]:
    """Good family through embedded expander; a failed routing primitive restarts the good-family search"""
    chosen = tuple(sub.pairs[: params.k_prime // 2])
    if 2 * len(chosen) != params.k_prime:
        raise ParameterDegeneracyError(f"{len(sub.pairs)} pairs cannot supply k′={params.k_prime} terminals")
    g = sub.graph
    while True:
        try:
            with monitor.stage("good-family"):
                family = find_good_family(
                    g,
                    sub.terminals,
                    params,
                    rng,
                    oracle=oracle,
                    monitor=monitor,
                    retry_budget=cfg.retry_budget,
                    cluster_spotchecks=cfg.wl_cluster_spotchecks,
                )
                report.rounds += family.rounds
            with monitor.stage("expander-build"):
                grouping = group_interfaces(g, family, params)
                trees = build_trees(g, grouping, params, rng, monitor, samples=cfg.split_samples)
                terminals = [v for pair in chosen for v in pair]
                return krv_build(g, grouping, trees, terminals, params, rng, monitor), chosen
        except RouteEscalation as e:
            report.escalations += 1
            monitor.retry("expander-build")
            monitor.event("expander-build", sub_instance=report.index, escalation=report.escalations, reason=e.message)
            if report.escalations > cfg.escalation_budget:
                raise StochasticFailure(
                    f"expander build escalated {report.escalations} times: {e.message}", stage="expander-build"
                ) from e
            logger.warning(f"⚠️ Escalation {report.escalations}/{cfg.escalation_budget}: {e.message}, new good family")


def route_subinstance(
    index: int,
    sub: SubInstance,
    cfg: RunConfig,
    rng: np.random.Generator,
    oracle: CutOracle,
    monitor: StageMonitor,
    minimal_k: Optional[int] = None,
) -> SubInstanceOutcome:
    report = SubInstanceReport(
        index=index,
        vertices=sub.graph.num_vertices,
        edges=sub.graph.num_edges,
        candidates=len(sub.candidates),
        selected=len(sub.pairs),
        sparsity=rounded(sub.sparsity),
        product_sparsity=rounded(sub.product_sparsity),
    )
    if not sub.pairs:
        return SubInstanceOutcome(report)
    params = ParamTable.for_k(len(sub.pairs), cfg.constants(), cfg.parsed_overrides())
    report.params = _echo(params, minimal_k)
    try:
        params.require_usable()
        emb, chosen = _build_expander(sub, params, cfg, rng, oracle, monitor, report)
    except ParameterDegeneracyError as e:
        return _fallback(sub, report, e.message)

    with monitor.stage("expander-route"):
        report.expansion = rounded(emb.expansion)
        report.expansion_exact = emb.expansion_exact
        position = {t: i for i, t in enumerate(emb.terminals)}
        x_pairs = [(position[s], position[t]) for s, t in chosen]
        greedy = greedy_route(
            emb.graph(),
            x_pairs,
            c_beta=cfg.constants().c_beta,
            expansion_checked=emb.expansion is not None and emb.expansion >= EXPANDER_THRESHOLD,
            monitor=monitor,
        )
        report.predicted = greedy.bound
        result = translate(sub.graph, list(greedy.path_set()), emb, monitor)
    report.routed = len(result)
    return SubInstanceOutcome(report, list(zip(result.pairs, result.paths)))


def _map_back(inst: Instance, routed: Routed) -> Routed:
    mapped = []
    for (s, t), path in routed:
        origin = (inst.vertex_origin.get(s, s), inst.vertex_origin.get(t, t))
        mapped.append((origin, inst.map_back(path)))
    return mapped


def run_pipeline(cfg: RunConfig, monitor: Optional[StageMonitor] = None) -> RunReport:
    """Route the demand pairs of cfg's instance with congestion at most 14 and report on every stage.

    Sub-instances run one after another on one seeded RNG stream, so a
    fixed seed gives the same report.
    """
    monitor = monitor or StageMonitor(timings=cfg.timings)
    rng = np.random.default_rng(cfg.seed)
    oracle = CutOracle(cfg.cut_oracle, cfg.size_bound)

    with monitor.stage("ingest"):
        raw = Instance(read_graph(cfg.graph), tuple(read_demands(cfg.demands)))
        if not raw.pairs:
            raise MalformedInputError("demand file holds no pairs")
        logger.info(f"Instance: n={raw.graph.num_vertices}, m={raw.graph.num_edges}, k={raw.k}")

    with monitor.stage("instance-prep"):
        inst = normalize(raw)
        solution = lp_solution(inst, cfg.epsilon)
        subs = partition_flow_well_linked(
            inst,
            epsilon=cfg.epsilon,
            rng=rng,
            threshold=Fraction(str(cfg.threshold)),
            spotchecks=cfg.wl_spotchecks,
            solution=solution,
        )
        for i, sub in enumerate(subs):
            monitor.event("instance-prep", sub_instance=i, spotchecks=len(sub.spotchecks), selected=len(sub.pairs))

    minimal_k = ParamTable.minimal_k(cfg.constants()) if not cfg.overrides else None
    outcomes = [route_subinstance(i, sub, cfg, rng, oracle, monitor, minimal_k) for i, sub in enumerate(subs)]
    routed = [item for outcome in outcomes for item in outcome.routed]
    fallback = any(outcome.report.fallback for outcome in outcomes)
    if not routed:
        route = single_pair_route(inst.graph, inst.pairs, "no sub-instance routed a pair")
        if route is not None:
            routed = [(route.pair, route.path)]
        fallback = True

    with monitor.stage("verify"):
        final = _map_back(inst, routed)
        verification = verify_routing(raw, final, limit=CONGESTION_LIMIT, lp_value=float(solution.value))

    return RunReport(
        version=__version__,
        config=cfg.echo(),
        instance={
            "vertices": raw.graph.num_vertices,
            "edges": raw.graph.num_edges,
            "pairs": raw.k,
            "normalized_vertices": inst.graph.num_vertices,
            "normalized_edges": inst.graph.num_edges,
        },
        lp_value=rounded(float(solution.value)),
        subinstances=[outcome.report for outcome in outcomes],
        routed=[RoutedPath(pair=pair, vertices=list(path.vertices), edges=list(path.edges)) for pair, path in final],
        histogram=verification.histogram,
        routed_fraction=verification.routed_fraction,
        fallback=fallback,
        stages=monitor.stages,
        checks=monitor.checks,
        retries=dict(sorted(monitor.retries.items())),
        events=monitor.events,
    )


__all__ = ["run_pipeline", "route_subinstance", "SubInstanceOutcome"]
