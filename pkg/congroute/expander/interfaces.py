# expander/interfaces.py - Interface grouping and the three routing primitives between good sets
from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from congroute.decomposition.grouping import group_edges
from congroute.errors import InvariantViolation, MalformedInputError, ParameterDegeneracyError, RouteEscalation
from congroute.expander.models import STAGE, InterfaceGrouping, SetInterface
from congroute.family.models import GoodFamily, GoodSubset
from congroute.family.params import ParamTable
from congroute.flows.maxflow import FlowProblem, max_flow_integral
from congroute.graph.models import EdgeId, MultiGraph, Path, PathSet, VertexId

logger = logging.getLogger(__name__)

WITHIN_BUDGET = 2
BETWEEN_BUDGET = 2
TERMINAL_BUDGET = 4


def _routing_host(g: MultiGraph, j: int, subset: GoodSubset) -> Tuple[MultiGraph, Dict[VertexId, VertexId]]:
    """Component of G[S_j] ∪ out(S_j), boundary edges on private stubs, that holds Γ_j"""
    gadget, _stub_of, real_of = g.boundary_gadget(subset.vertices)
    touched = set()
    for e in subset.interface:
        touched.update(gadget.endpoints(e))
    comps = [c for c in gadget.components() if c & touched]
    if len(comps) != 1:
        raise RouteEscalation(
            f"interface of set {j} spreads over {len(comps)} components of G[S_j]",
            stage=STAGE,
            cluster=subset.vertices,
        )
    host = gadget.induced(comps[0])
    return host, {stub: real for stub, real in real_of.items() if stub in host.vertices}


def group_interface(g: MultiGraph, j: int, subset: GoodSubset, p: int, k_star: int) -> SetInterface:
    if len(subset.interface) < p:
        raise ParameterDegeneracyError(f"|Γ_{j}|={len(subset.interface)} is below p={p}", stage=STAGE)
    host, real_of = _routing_host(g, j, subset)
    grouping = group_edges(host, subset.interface, p)

    representatives: List[EdgeId] = []
    subgroups: Dict[EdgeId, frozenset] = {}
    trees: Dict[EdgeId, frozenset] = {}
    for index in sorted(range(len(grouping)), key=lambda i: min(grouping.groups[i])):
        members = sorted(grouping.groups[index])
        e = members[0]
        representatives.append(e)
        subgroups[e] = frozenset(members[:p])
        trees[e] = grouping.trees[index]
    if len(representatives) < k_star:
        raise ParameterDegeneracyError(
            f"set {j} has {len(representatives)} groups, fewer than k*={k_star}", stage=STAGE
        )
    kept = tuple(representatives[:k_star])
    return SetInterface(
        index=j,
        vertices=subset.vertices,
        interface=subset.interface,
        grouping=grouping,
        representatives=kept,
        subgroups={e: subgroups[e] for e in kept},
        trees={e: trees[e] for e in kept},
        host=host,
        real_of=real_of,
    )


def group_interfaces(g: MultiGraph, family: GoodFamily, params: ParamTable) -> InterfaceGrouping:
    """Group every Γ_j along a spanning tree of its set and keep k* representatives per set"""
    sets = tuple(group_interface(g, j, subset, params.p, params.k_star) for j, subset in enumerate(family.sets))
    grouping = InterfaceGrouping(sets, params.p, params.k_star)
    grouping.verify()
    logger.debug(f"Interface grouping: {[len(s.grouping) for s in sets]} groups per set, k*={params.k_star}")
    return grouping


def _identity(g: MultiGraph, e: EdgeId) -> Path:
    a, b = g.endpoints(e)
    return Path((a, b), (e,))


def _check_one_to_one(paths: PathSet, x: frozenset, y: frozenset, budget: int, what: str) -> None:
    firsts = [path.first_edge for path in paths]
    lasts = [path.last_edge for path in paths]
    if sorted(firsts) != sorted(x) or sorted(lasts) != sorted(y):
        raise InvariantViolation(f"{what} paths do not pair the edge sets one-to-one", stage=STAGE)
    if paths.congestion() > budget:
        raise InvariantViolation(f"{what} congestion {paths.congestion()} exceeds {budget}", stage=STAGE)


def _edge_routing(
    g: MultiGraph,
    x: frozenset,
    y: frozenset,
    budget: int,
    what: str,
    cluster: Optional[frozenset] = None,
) -> List[Path]:
    if len(x) != len(y):
        raise MalformedInputError(f"{what}: |X|={len(x)} differs from |Y|={len(y)}")
    common = x & y
    paths = [_identity(g, e) for e in sorted(common)]
    rest_x, rest_y = x - common, y - common
    if not rest_x:
        return paths
    problem = FlowProblem(
        g,
        source_edges=rest_x,
        sink_edges=rest_y,
        capacity=budget,
        source_limit=1,
        sink_limit=1,
        budgets={e: budget - 1 for e in common},
    )
    result = max_flow_integral(problem, len(rest_x))
    if not result.feasible:
        raise RouteEscalation(
            f"{what}: only {result.value} of {len(rest_x)} edges routable with congestion {budget}",
            stage=STAGE,
            cluster=cluster,
            cut=result.cut,
        )
    return paths + list(result.paths)


def _inner(s: SetInterface, e: EdgeId) -> VertexId:
    a, b = s.host.endpoints(e)
    return b if a in s.real_of else a


def spread_paths(s: SetInterface, e: EdgeId) -> Dict[EdgeId, Path]:
    """Paths of the group tree T_j(U_e) from the inner end of e to the inner end of every edge of U′_e"""
    tree = s.host.edge_subgraph(s.trees[e])
    start = _inner(s, e)
    paths: Dict[EdgeId, Path] = {}
    for f in sorted(s.subgroups[e]):
        end = _inner(s, f)
        path = tree.bfs_path(start, end) if {start, end} <= tree.vertices else None
        if path is None:
            raise InvariantViolation(f"group tree of edge {e} does not reach edge {f}", stage=STAGE)
        paths[f] = path
    return paths


def route_within(s: SetInterface, x: Iterable[EdgeId], y: Iterable[EdgeId], budget: int = WITHIN_BUDGET) -> PathSet:
    """Pair X with Y by paths inside G[S_j] ∪ out(S_j); boundary edges only end paths.

    Every edge of X is spread over its subgroup along its group tree, one
    unit per edge is routed between the subgroups of X and those of Y, and
    the unit is collected along the tree of the Y edge it reached. The flow
    may use an edge of those trees at most ``budget - 1`` times.
    """
    x, y = frozenset(x), frozenset(y)
    what = f"route_within(S_{s.index})"
    if len(x) != len(y):
        raise MalformedInputError(f"{what}: |X|={len(x)} differs from |Y|={len(y)}")
    if not (x | y) <= frozenset(s.representatives):
        raise MalformedInputError(f"route_within on set {s.index} needs X, Y inside Γ′")
    common = x & y
    raw = [_identity(s.host, e) for e in sorted(common)]
    rest_x, rest_y = sorted(x - common), sorted(y - common)
    if rest_x:
        reach = {e: {path.target: path for path in spread_paths(s, e).values()} for e in rest_x + rest_y}
        budgets = {f: budget - 1 for e in reach for f in s.trees[e]}
        budgets.update({e: budget - 1 for e in common})
        problem = FlowProblem(
            s.host,
            capacity=budget,
            budgets=budgets,
            source_groups=tuple(frozenset(reach[e]) for e in rest_x),
            sink_groups=tuple(frozenset(reach[e]) for e in rest_y),
        )
        result = max_flow_integral(problem, len(rest_x))
        if not result.feasible:
            raise RouteEscalation(
                f"{what}: only {result.value} of {len(rest_x)} subgroups routable with congestion {budget}",
                stage=STAGE,
                cluster=s.vertices,
                cut=result.cut,
            )
        for middle, (i, j) in zip(result.paths, result.ends):
            a, b = rest_x[i], rest_y[j]
            head = Path((s.host.other_end(a, _inner(s, a)), _inner(s, a)), (a,))
            tail = Path((_inner(s, b), s.host.other_end(b, _inner(s, b))), (b,))
            walk = head.concat(reach[a][middle.source]).concat(middle)
            walk = walk.concat(reach[b][middle.target].reversed()).concat(tail)
            raw.append(walk.shortcut())
    paths = PathSet.of(sorted((p.map(lambda v: s.real_of.get(v, v)) for p in raw), key=lambda p: p.first_edge))
    _check_one_to_one(paths, x, y, budget, "route_within")
    return paths


def route_between(g: MultiGraph, x: Sequence[EdgeId], y: Sequence[EdgeId], budget: int = BETWEEN_BUDGET) -> PathSet:
    """Pair Γ′_i with Γ′_j by paths of G with congestion at most ``budget``"""
    x, y = frozenset(x), frozenset(y)
    paths = PathSet.of(sorted(_edge_routing(g, x, y, budget, "route_between"), key=lambda p: p.first_edge))
    paths.validate(g)
    _check_one_to_one(paths, x, y, budget, "route_between")
    return paths


def connect_terminals(
    g: MultiGraph,
    edges: Sequence[EdgeId],
    terminals: Sequence[VertexId],
    budget: int = TERMINAL_BUDGET,
) -> Mapping[EdgeId, Path]:
    """Route each terminal to a distinct edge of Γ*; returns edge -> path ending on it"""
    edges, chosen = frozenset(edges), frozenset(terminals)
    if len(edges) != len(chosen):
        raise MalformedInputError(f"connect_terminals: {len(chosen)} terminals for {len(edges)} edges")
    problem = FlowProblem(
        g, source_vertices=chosen, sink_edges=edges, capacity=budget, source_limit=1, sink_limit=1
    )
    result = max_flow_integral(problem, len(edges))
    if not result.feasible:
        raise RouteEscalation(
            f"connect_terminals: only {result.value} of {len(edges)} terminals reach Γ*",
            stage=STAGE,
            cut=result.cut,
        )
    paths = result.paths
    paths.validate(g)
    if sorted(p.source for p in paths) != sorted(chosen) or sorted(p.last_edge for p in paths) != sorted(edges):
        raise InvariantViolation("terminal paths do not pair terminals with Γ* one-to-one", stage=STAGE)
    if paths.congestion() > budget:
        raise InvariantViolation(f"terminal path congestion {paths.congestion()} exceeds {budget}", stage=STAGE)
    return {p.last_edge: p for p in paths}


__all__ = [
    "group_interface",
    "group_interfaces",
    "route_within",
    "spread_paths",
    "route_between",
    "connect_terminals",
    "WITHIN_BUDGET",
    "BETWEEN_BUDGET",
    "TERMINAL_BUDGET",
]
