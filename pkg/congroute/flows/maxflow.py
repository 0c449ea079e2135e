# flows/maxflow.py - Integral max-flow / min-cut with path decomposition
from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms.flow import shortest_augmenting_path

from congroute.errors import InvariantViolation, MalformedInputError
from congroute.graph.models import EdgeId, MultiGraph, Path, PathSet, VertexId

logger = logging.getLogger(__name__)

SOURCE = ("s",)
SINK = ("t",)


@dataclass(frozen=True)
class FlowProblem:
    """Single-commodity flow between vertex and/or edge terminals.

    Every edge of the host graph carries ``capacity`` units in total, in
    either direction. An edge used as a source or sink counts against its
    own capacity, which realizes the subdivision of designated edges
    without touching the host graph. Each of ``source_groups`` emits, and
    each of ``sink_groups`` absorbs, one unit through any of its vertices.
    """

    graph: MultiGraph
    source_vertices: FrozenSet[VertexId] = frozenset()
    source_edges: FrozenSet[EdgeId] = frozenset()
    sink_vertices: FrozenSet[VertexId] = frozenset()
    sink_edges: FrozenSet[EdgeId] = frozenset()
    capacity: int = 1
    source_limit: Optional[int] = None
    sink_limit: Optional[int] = None
    budgets: Mapping[EdgeId, int] = field(default_factory=dict)
    source_groups: Tuple[FrozenSet[VertexId], ...] = ()
    sink_groups: Tuple[FrozenSet[VertexId], ...] = ()

    def __post_init__(self):
        if not isinstance(self.capacity, int) or self.capacity < 1:
            raise MalformedInputError(f"capacity must be a positive integer, got {self.capacity}")
        self.graph.check_vertices(self.source_vertices | self.sink_vertices)
        for group in self.source_groups + self.sink_groups:
            if not group:
                raise MalformedInputError("terminal groups must not be empty")
            self.graph.check_vertices(group)
        self.graph.check_edges(self.source_edges | self.sink_edges)
        if self.source_vertices & self.sink_vertices:
            raise MalformedInputError("source and sink vertex sets overlap")
        if self.source_edges & self.sink_edges:
            raise MalformedInputError("source and sink edge sets overlap")

    def edge_capacity(self, eid: EdgeId) -> int:
        return self.budgets.get(eid, self.capacity)


@dataclass(frozen=True)
class FlowResult:
    value: int
    demand: int
    paths: Optional[PathSet] = None
    cut: Optional[FrozenSet[VertexId]] = None
    cut_edges: FrozenSet[EdgeId] = frozenset()
    certified: bool = True
    # (source group, sink group) per path, None where a path ends on a plain terminal
    ends: Tuple[Tuple[Optional[int], Optional[int]], ...] = ()

    @property
    def feasible(self) -> bool:
        return self.paths is not None and self.value >= self.demand


def _vertex(x: VertexId) -> Tuple[str, VertexId]:
    return ("v", x)


def _build_network(problem: FlowProblem) -> nx.DiGraph:
    g = problem.graph
    net = nx.DiGraph()
    net.add_node(SOURCE)
    net.add_node(SINK)
    for eid, (a, b) in g.edges.items():
        cap = problem.edge_capacity(eid)
        if cap <= 0:
            continue
        enter, leave = ("m", eid), ("n", eid)
        net.add_edge(_vertex(a), enter, capacity=cap)
        net.add_edge(_vertex(b), enter, capacity=cap)
        net.add_edge(enter, leave, capacity=cap)
        net.add_edge(leave, _vertex(a), capacity=cap)
        net.add_edge(leave, _vertex(b), capacity=cap)
    for x in sorted(problem.source_vertices):
        if problem.source_limit is None:
            net.add_edge(SOURCE, _vertex(x))
        else:
            net.add_edge(SOURCE, _vertex(x), capacity=problem.source_limit)
    for eid in sorted(problem.source_edges):
        limit = problem.source_limit if problem.source_limit is not None else problem.edge_capacity(eid)
        net.add_edge(SOURCE, ("m", eid), capacity=limit)
    for x in sorted(problem.sink_vertices):
        if problem.sink_limit is None:
            net.add_edge(_vertex(x), SINK)
        else:
            net.add_edge(_vertex(x), SINK, capacity=problem.sink_limit)
    for eid in sorted(problem.sink_edges):
        limit = problem.sink_limit if problem.sink_limit is not None else problem.edge_capacity(eid)
        net.add_edge(("n", eid), SINK, capacity=limit)
    for index, group in enumerate(problem.source_groups):
        net.add_edge(SOURCE, ("g", index), capacity=1)
        for x in sorted(group):
            net.add_edge(("g", index), _vertex(x))
    for index, group in enumerate(problem.sink_groups):
        net.add_edge(("h", index), SINK, capacity=1)
        for x in sorted(group):
            net.add_edge(_vertex(x), ("h", index))
    return net


def _solve(problem: FlowProblem, cutoff: Optional[int]) -> Tuple[int, Dict, nx.DiGraph]:
    net = _build_network(problem)
    value, flow = nx.maximum_flow(net, SOURCE, SINK, flow_func=shortest_augmenting_path, cutoff=cutoff)
    return int(value), flow, net


def _residual_reach(net: nx.DiGraph, flow: Mapping, start: Hashable, backwards: bool = False) -> set:
    """Nodes reachable from start in the residual network (or able to reach it)"""
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if not backwards:
            forward = ((w, net[u][w]) for w in net.succ[u])
            reverse = (w for w in net.pred[u])
            for w, data in forward:
                if w not in seen and flow[u][w] < data.get("capacity", float("inf")):
                    seen.add(w)
                    queue.append(w)
            for w in reverse:
                if w not in seen and flow[w][u] > 0:
                    seen.add(w)
                    queue.append(w)
        else:
            for w in net.pred[u]:
                if w not in seen and flow[w][u] < net[w][u].get("capacity", float("inf")):
                    seen.add(w)
                    queue.append(w)
            for w in net.succ[u]:
                if w not in seen and flow[u][w] > 0:
                    seen.add(w)
                    queue.append(w)
    return seen


def _cut_from_side(net: nx.DiGraph, side: set) -> Tuple[FrozenSet[VertexId], FrozenSet[EdgeId]]:
    vertices = frozenset(node[1] for node in side if node[0] == "v")
    crossing = set()
    for u in side:
        for w in net.succ[u]:
            if w not in side:
                for node in (u, w):
                    if node[0] in ("m", "n"):
                        crossing.add(node[1])
                        break
    return vertices, frozenset(crossing)


def _decompose(flow: Mapping) -> List[List[Hashable]]:
    """Split an integral flow into unit source-sink walks, cancelling cycles"""
    residual: Dict[Hashable, Dict[Hashable, int]] = {}
    for u, nbrs in flow.items():
        positive = {w: int(f) for w, f in nbrs.items() if f > 0}
        if positive:
            residual[u] = positive

    def take(u, w):
        residual[u][w] -= 1
        if residual[u][w] == 0:
            del residual[u][w]
            if not residual[u]:
                del residual[u]

    walks: List[List[Hashable]] = []
    while SOURCE in residual:
        walk = [SOURCE]
        index = {SOURCE: 0}
        node = SOURCE
        while node != SINK:
            if node not in residual:
                raise InvariantViolation("flow decomposition reached a node without outgoing flow", stage="flow-engine")
            nxt = next(iter(residual[node]))
            if nxt in index:
                start = index[nxt]
                cycle = walk[start:] + [nxt]
                for a, b in zip(cycle, cycle[1:]):
                    take(a, b)
                for dropped in walk[start + 1:]:
                    del index[dropped]
                walk = walk[: start + 1]
                node = nxt
                continue
            index[nxt] = len(walk)
            walk.append(nxt)
            node = nxt
        for a, b in zip(walk, walk[1:]):
            take(a, b)
        walks.append(walk)
    return walks


def _to_graph_path(g: MultiGraph, walk: Sequence[Hashable]) -> Path:
    vertices: List[VertexId] = []
    edges: List[EdgeId] = []
    pending: Optional[EdgeId] = None
    for node in walk:
        if node in (SOURCE, SINK):
            continue
        kind, ident = node
        if kind == "n":
            pending = ident
        elif kind == "v":
            if pending is None:
                vertices.append(ident)
            elif not vertices:
                vertices.extend((g.other_end(pending, ident), ident))
                edges.append(pending)
            elif vertices[-1] != ident:
                vertices.append(ident)
                edges.append(pending)
            pending = None
    if pending is not None:
        vertices.append(g.other_end(pending, vertices[-1]))
        edges.append(pending)
    return Path(tuple(vertices), tuple(edges))


def _group_ends(walk: Sequence[Hashable]) -> Tuple[Optional[int], Optional[int]]:
    first, last = walk[1], walk[-2]
    return (first[1] if first[0] == "g" else None, last[1] if last[0] == "h" else None)


def max_flow_integral(problem: FlowProblem, demand: Optional[int] = None) -> FlowResult:
    """Route `demand` integral units or return a cut of smaller capacity.

    With demand=None the maximum flow is computed and always decomposed.
    """
    if demand is not None and demand < 0:
        raise MalformedInputError(f"demand must be non-negative, got {demand}")
    if demand == 0:
        return FlowResult(value=0, demand=0, paths=PathSet())
    value, flow, net = _solve(problem, demand)
    if demand is None or value >= demand:
        walks = _decompose(flow)
        paths = PathSet.of(_to_graph_path(problem.graph, walk) for walk in walks)
        load = paths.load()
        over = [eid for eid, count in load.items() if count > problem.edge_capacity(eid)]
        if over:
            raise InvariantViolation(f"decomposed paths overload edges {over[:5]}", stage="flow-engine")
        ends = tuple(_group_ends(walk) for walk in walks) if problem.source_groups or problem.sink_groups else ()
        return FlowResult(value=len(paths), demand=value if demand is None else demand, paths=paths, ends=ends)
    side = _residual_reach(net, flow, SOURCE)
    cut, cut_edges = _cut_from_side(net, side)
    logger.debug(f"Max-flow {value} below demand {demand}; cut side has {len(cut)} vertices")
    return FlowResult(value=value, demand=demand, cut=cut, cut_edges=cut_edges)


def max_flow_value(problem: FlowProblem, cutoff: Optional[int] = None) -> int:
    value, _flow, _net = _solve(problem, cutoff)
    return value


def min_cut(problem: FlowProblem) -> Tuple[int, FrozenSet[VertexId], FrozenSet[VertexId]]:
    """Flow value plus the source-side and sink-side minimum cuts (as source-side vertex sets)"""
    value, flow, net = _solve(problem, None)
    source_side, _ = _cut_from_side(net, _residual_reach(net, flow, SOURCE))
    sink_reach, _ = _cut_from_side(net, _residual_reach(net, flow, SINK, backwards=True))
    return value, source_side, problem.graph.vertices - sink_reach


def _check_matching(g: MultiGraph, matching: Sequence[Tuple[VertexId, VertexId]]) -> None:
    seen = set()
    for a, b in matching:
        g.check_vertices((a, b))
        if a == b or a in seen or b in seen:
            raise MalformedInputError(f"matching repeats a vertex at pair ({a}, {b})")
        seen.update((a, b))


def _greedy(g: MultiGraph, order: Sequence[int], matching, budget: int) -> Tuple[int, Dict[int, Path]]:
    load: Counter = Counter()
    routed: Dict[int, Path] = {}
    for index in order:
        a, b = matching[index]
        path = g.bfs_path(a, b, usable=lambda eid: load[eid] < budget)
        if path is None:
            continue
        load.update(path.edges)
        routed[index] = path
    return len(routed), routed


def _matching_orders(g: MultiGraph, matching) -> List[List[int]]:
    natural = list(range(len(matching)))
    distance = {}
    for i, (a, b) in enumerate(matching):
        path = g.bfs_path(a, b)
        distance[i] = len(path) if path is not None else g.num_vertices + 1
    by_length = sorted(natural, key=lambda i: (distance[i], i))
    orders = [natural, list(reversed(natural)), by_length]
    unique = []
    for order in orders:
        if order not in unique:
            unique.append(order)
    return unique


def route_matching(g: MultiGraph, matching: Sequence[Tuple[VertexId, VertexId]], budget: int = 1) -> FlowResult:
    """Integral routing of every pair with congestion <= budget, or a separating cut.

    Pairs are routed greedily along shortest paths of the residual budget
    graph under a few deterministic orders. On failure the best pair
    min-cut is returned; it is ``certified`` when it separates more pairs
    than its capacity, which proves infeasibility.
    """
    _check_matching(g, matching)
    demand = len(matching)
    if demand == 0:
        return FlowResult(value=0, demand=0, paths=PathSet())
    best = 0
    for order in _matching_orders(g, matching):
        count, routed = _greedy(g, order, matching, budget)
        if count == demand:
            return FlowResult(value=demand, demand=demand, paths=PathSet.of(routed[i] for i in range(demand)))
        best = max(best, count)

    best_cut = None
    best_score = None
    for a, b in matching:
        problem = FlowProblem(g, source_vertices=frozenset((a,)), sink_vertices=frozenset((b,)), capacity=budget)
        _value, source_side, sink_side = min_cut(problem)
        for side in (source_side, sink_side):
            separated = sum(1 for x, y in matching if (x in side) != (y in side))
            capacity = budget * len(g.out_edges(side))
            score = separated - capacity
            if best_score is None or score > best_score:
                best_score, best_cut = score, side
    cut_edges = g.out_edges(best_cut)
    certified = best_score is not None and best_score > 0
    if certified:
        logger.debug(f"route_matching failed: routed {best}/{demand}, best cut slack {best_score}")
    else:
        logger.warning(
            f"⚠️ route_matching routed {best}/{demand} pairs at congestion {budget}; "
            f"no cut proves the rest infeasible (best slack {best_score})"
        )
    return FlowResult(value=best, demand=demand, cut=best_cut, cut_edges=cut_edges, certified=certified)


__all__ = [
    "FlowProblem",
    "FlowResult",
    "max_flow_integral",
    "max_flow_value",
    "min_cut",
    "route_matching",
]
