# family/search.py - Randomized search for a good family over shrinking legal contracted graphs
from __future__ import annotations

import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from congroute.cuts.oracle import CutOracle, is_violating
from congroute.decomposition.welllinked import decompose_bounded
from congroute.errors import ContractViolationError, InvariantViolation, RouteEscalation, StochasticFailure
from congroute.family.contracted import DEFAULT_CLUSTER_SPOTCHECKS, LegalContractedGraph, check_legality
from congroute.family.models import Deactivated, Good, GoodFamily, GoodSubset, Outcome, SearchState, Split
from congroute.family.params import ParamTable
from congroute.flows.maxflow import FlowProblem, max_flow_integral, route_matching
from congroute.graph.models import EdgeId, MultiGraph, Path, PathSet, VertexId, VertexSubset
from congroute.monitoring import StageMonitor

logger = logging.getLogger(__name__)

STAGE = "good-family"
DEFAULT_RETRY_BUDGET = 200


def partition_conditions(h: MultiGraph, parts: Sequence[VertexSubset], gamma: int) -> List[Tuple[int, int, bool]]:
    """(|out_H(X_j)|, |E_H(X_j)|, ok) per part, where ok means γ|out| < 10m and 2γ²|E(X_j)| >= m"""
    m = h.num_edges
    result = []
    for part in parts:
        out = len(h.out_edges(part))
        inner = len(h.inner_edges(part))
        result.append((out, inner, gamma * out < 10 * m and 2 * gamma * gamma * inner >= m))
    return result


def sample_partition(
    lcg: LegalContractedGraph,
    gamma: int,
    rng: np.random.Generator,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    monitor: Optional[StageMonitor] = None,
) -> List[VertexSubset]:
    """Assign every vertex of G′ ∖ 𝒯 to one of γ parts uniformly until both part conditions hold"""
    h = lcg.without_terminals()
    order = h.sorted_vertices()
    for attempt in range(1, retry_budget + 1):
        labels = rng.integers(0, gamma, size=len(order))
        parts = [frozenset(v for v, label in zip(order, labels) if label == j) for j in range(gamma)]
        if all(ok for _out, _inner, ok in partition_conditions(h, parts, gamma)):
            logger.debug(f"Partition of {len(order)} vertices accepted after {attempt} attempts")
            return parts
        if monitor is not None:
            monitor.retry(STAGE)
    raise StochasticFailure(
        f"no partition of G′∖T into {gamma} parts met both conditions in {retry_budget} attempts",
        stage=STAGE,
        edges=h.num_edges,
    )


def _apply_split(state: SearchState, cluster: VertexSubset, outcome: Split) -> None:
    current = state.current.uncontract([state.node_of(cluster)])
    for side in (outcome.cut.x, outcome.cut.y):
        current, _ = current.contract_cluster(side)
    state.current = current
    state.active.remove(cluster)
    state.active.extend((outcome.cut.x, outcome.cut.y))
    state.splits += 1


def _violating(state: SearchState, cluster: VertexSubset, params: ParamTable, oracle: CutOracle, terminals) -> Optional[Split]:
    cut = oracle(state.base, cluster, params.k, params.alpha, terminals=terminals)
    if cut is None:
        return None
    if not is_violating(state.base, cluster, cut, params.k, params.alpha, terminals=terminals):
        raise ContractViolationError("oracle returned a cut that is not violating", stage=STAGE)
    return Split(cluster, cut)


def _deactivate(state: SearchState, s: VertexSubset, x: VertexSubset, params: ParamTable, oracle: CutOracle) -> Deactivated:
    """Case 2: decompose the uncontracted cut side and park the clusters it swallowed"""
    side = state.current.expand(x)
    boundary = len(state.base.out_edges(side))
    if boundary >= params.k1:
        raise InvariantViolation(f"cut side has |out_G(A)|={boundary} >= k1={params.k1}", stage=STAGE)
    decomposition = decompose_bounded(state.base, side, params.k, params, oracle)
    moved = tuple(c for c in state.active if state.node_of(c) in x)
    current = state.current.uncontract([v for v in x if state.current.is_super(v)])
    for cluster in decomposition.clusters:
        current, _ = current.contract_cluster(cluster)
    state.current = current
    for cluster in moved:
        state.active.remove(cluster)
        state.inactive.append(cluster)
    state.responsible.append((s, side, decomposition))
    return Deactivated(s, side, decomposition, moved)


def _route_clusters(
    state: SearchState, paths: Sequence[Path], params: ParamTable, oracle: CutOracle
) -> Tuple[Dict[Tuple[VertexId, EdgeId], Path], Optional[Split]]:
    """Route the demand D_C of every traversed super-node inside G[C] ∪ out(C)"""
    demands: Dict[VertexId, List[Tuple[EdgeId, EdgeId]]] = defaultdict(list)
    for path in paths:
        for pos in range(1, len(path.vertices) - 1):
            x = path.vertices[pos]
            if state.current.is_super(x):
                demands[x].append((path.edges[pos - 1], path.edges[pos]))

    inner: Dict[Tuple[VertexId, EdgeId], Path] = {}
    for x in sorted(demands):
        members = state.current.members(x)
        gadget, stub_of, _real = state.base.boundary_gadget(members)
        matching = [(stub_of[a], stub_of[b]) for a, b in demands[x]]
        routed = route_matching(gadget, matching, budget=params.eta)
        if not routed.feasible:
            used = frozenset(e for pair in demands[x] for e in pair)
            split = _violating(state, members, params, oracle, used) if members in state.active else None
            if split is not None:
                return inner, split
            raise RouteEscalation(
                f"demand of {len(matching)} pairs does not route inside a cluster of {len(members)} vertices",
                stage=STAGE,
                cluster=members,
                cut=routed.cut,
            )
        for (a, _b), path in zip(demands[x], routed.paths):
            inner[(x, a)] = path
    return inner, None


def _certificate_path(state: SearchState, s: VertexSubset, path: Path, inner: Dict[Tuple[VertexId, EdgeId], Path]) -> Path:
    """Expand a path of the contracted graph into G, splicing in the routes through clusters"""
    g = state.base
    vertices = [g.inner_endpoint(path.edges[0], s)]
    edges: List[EdgeId] = []
    for pos, eid in enumerate(path.edges):
        edges.append(eid)
        vertices.append(g.other_end(eid, vertices[-1]))
        x = path.vertices[pos + 1]
        if pos + 1 < len(path.edges) and state.current.is_super(x):
            route = inner[(x, eid)]
            for f, w in zip(route.edges[1:-1], route.vertices[2:-1]):
                edges.append(f)
                vertices.append(w)
    return Path(tuple(vertices), tuple(edges)).shortcut()


def process_cluster(state: SearchState, s: VertexSubset, params: ParamTable, oracle: CutOracle) -> Outcome:
    """Try to certify S as good; otherwise split some active cluster or deactivate a cut side"""
    node = state.node_of(s)
    current = state.current
    outside = current.vertices - {node}
    gadget, stub_of, _real = current.boundary_gadget(outside)
    if len(stub_of) < params.k1:
        return _deactivate(state, s, frozenset((node,)), params, oracle)

    problem = FlowProblem(
        gadget,
        source_edges=frozenset(stub_of),
        sink_vertices=state.terminals,
        sink_limit=1,
    )
    result = max_flow_integral(problem, demand=params.k1)
    if not result.feasible:
        x = (frozenset(result.cut or ()) & outside) - state.terminals
        return _deactivate(state, s, x | {node}, params, oracle)

    paths = sorted((p.shortcut() for p in result.paths), key=lambda p: p.first_edge)[: params.k1]
    interface = frozenset(p.first_edge for p in paths)
    split = _violating(state, s, params, oracle, interface)
    if split is not None:
        return split

    inner, split = _route_clusters(state, paths, params, oracle)
    if split is not None:
        return split
    certificate = PathSet.of(_certificate_path(state, s, p, inner) for p in paths)
    subset = GoodSubset(s, interface, certificate)
    subset.verify(state.base, state.terminals, params.k1, params.eta)
    return Good(subset)


def run_partition_round(
    lcg: LegalContractedGraph, part: VertexSubset, params: ParamTable, oracle: CutOracle
) -> Tuple[Optional[GoodSubset], SearchState]:
    """Partitioning procedure for one part X_j of the sampled partition"""
    g_prime = lcg.graph
    members = g_prime.expand(part)
    current = g_prime.uncontract([v for v in part if g_prime.is_super(v)])
    current, _ = current.contract_cluster(members)
    state = SearchState(base=lcg.base, terminals=lcg.terminals, current=current, active=[members])

    while state.active:
        s = min(state.active, key=min)
        outcome = process_cluster(state, s, params, oracle)
        if isinstance(outcome, Good):
            return outcome.subset, state
        if isinstance(outcome, Split):
            _apply_split(state, outcome.cluster, outcome)

    covered = [v for cluster in state.inactive for v in cluster]
    if len(covered) != len(members) or set(covered) != members:
        raise InvariantViolation("inactive clusters do not partition X′_j", stage=STAGE)
    return None, state


def chain_bound(lcg: LegalContractedGraph, part: VertexSubset, state: SearchState, gamma: int) -> Fraction:
    """|E(G′)| − |out_G′(X_j)|(1 + 1/20γ) + Σ_{C∈W²}|out(C)|(1 + 1/64γ)"""
    out_x = len(lcg.graph.out_edges(part))
    parked = sum(len(state.base.out_edges(c)) for c in state.inactive)
    return (
        lcg.num_edges
        - out_x * (1 + Fraction(1, 20 * gamma))
        + parked * (1 + Fraction(1, 64 * gamma))
    )


def find_good_family(
    g: MultiGraph,
    terminals,
    params: ParamTable,
    rng: np.random.Generator,
    oracle: Optional[CutOracle] = None,
    monitor: Optional[StageMonitor] = None,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    cluster_spotchecks: int = DEFAULT_CLUSTER_SPOTCHECKS,
) -> GoodFamily:
    """Good family of γ sets, contracting G further after every failed partition.

    A partition that met both part conditions and still produced no good
    set must leave a strictly smaller legal contracted graph that obeys the
    contraction inequality chain; both are hard checks whatever alpha is.
    Only the sampling of a partition is retried, up to ``retry_budget``.
    """
    oracle = oracle or CutOracle()
    monitor = monitor or StageMonitor()
    params.require_usable()
    lcg = LegalContractedGraph.trivial(g, terminals)
    rounds = 0

    while True:
        rounds += 1
        legality = check_legality(lcg, params.k, params.k1, params.alpha_wl, rng, cluster_spotchecks, strict=False)
        monitor.check("legal contracted graph", legality.passed, "; ".join(legality.problems[:3]) or f"round {rounds}", stage=STAGE)
        monitor.check(
            "edges outside terminals >= k/6",
            legality.enough_edges,
            f"{legality.outside_edges} vs {float(legality.edge_floor):.2f}",
            stage=STAGE,
            hard=False,
        )
        if legality.spotchecks:
            monitor.check(
                "cluster well-linkedness spot-checks",
                legality.spotchecks_passed,
                f"{sum(c.passed for c in legality.spotchecks)}/{len(legality.spotchecks)}",
                stage=STAGE,
                hard=False,
            )

        parts = sample_partition(lcg, params.gamma, rng, retry_budget, monitor)
        found: List[GoodSubset] = []
        failed: Optional[Tuple[VertexSubset, SearchState]] = None
        for part in parts:
            subset, state = run_partition_round(lcg, part, params, oracle)
            if subset is None:
                failed = (part, state)
                break
            found.append(subset)

        if failed is None:
            family = GoodFamily(tuple(found), params.k1, params.eta, rounds)
            family.verify(g, frozenset(terminals), params.gamma)
            monitor.event(STAGE, round=rounds, outcome="family", sets=len(family))
            logger.info(f"✅ Good family of {len(family)} sets after {rounds} rounds")
            return family

        part, state = failed
        nxt = LegalContractedGraph(state.current, lcg.terminals)
        before, after = lcg.num_edges, nxt.num_edges
        bound = chain_bound(lcg, part, state, params.gamma)
        monitor.event(
            STAGE,
            round=rounds,
            outcome="contracted",
            edges_before=before,
            edges_after=after,
            chain_bound=round(float(bound), 6),
            inactive=len(state.inactive),
            splits=state.splits,
        )
        monitor.check("|E(G″)| < |E(G′)|", after < before, f"{after} vs {before}", stage=STAGE)
        monitor.check(
            "contraction inequality chain",
            after <= bound < before,
            f"{after} <= {float(bound):.3f} < {before}",
            stage=STAGE,
        )
        logger.info(f"Round {rounds}: no good set in part of {len(part)} vertices, contracted {before} -> {after} edges")
        lcg = nxt


__all__ = [
    "DEFAULT_RETRY_BUDGET",
    "partition_conditions",
    "sample_partition",
    "process_cluster",
    "run_partition_round",
    "chain_bound",
    "find_good_family",
]
