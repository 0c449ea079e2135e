# expander/splitting.py - Augmented Eulerian digraph, connectivity-preserving splitting-off, graph Z
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.flow import shortest_augmenting_path

from congroute.errors import InvariantViolation, PreconditionError
from congroute.expander.models import STAGE, InterfaceGrouping
from congroute.graph.models import EdgeId, MultiGraph, Path, VertexId

logger = logging.getLogger(__name__)

DEFAULT_SPLIT_SAMPLES = 10
MAX_TREE_DEGREE = 3

Arc = Tuple[VertexId, VertexId]
KeptPair = Tuple[VertexId, VertexId]


@dataclass(frozen=True)
class AugmentedGraph:
    """G with doubled edges, a subdivision vertex per interface copy and a hub s_j per set; all bi-directed.

    ``arcs[i]`` is the i-th arc as (tail, head) and ``labels[i]`` the edge of
    G it lies on, or None for the link between a subdivision vertex and its hub.
    """

    arcs: Tuple[Arc, ...]
    labels: Tuple[Optional[EdgeId], ...]
    hubs: Tuple[VertexId, ...]
    mids: Mapping[VertexId, Tuple[EdgeId, int]]

    def hub_index(self, v: VertexId) -> int:
        return self.hubs.index(v)

    def realize(self, g: MultiGraph, route: Sequence[int]) -> Path:
        """G-walk of a hub-to-hub route: drop both hub links, merge the halves of subdivided copies"""
        inner = list(route[1:-1])
        if not inner:
            raise InvariantViolation("hub route without an inner arc", stage=STAGE)
        _first_tail, first_head = self.arcs[inner[0]]
        vertices = [g.other_end(self.labels[inner[0]], first_head)]
        edges: List[EdgeId] = []
        for arc in inner:
            _tail, head = self.arcs[arc]
            if head in self.mids:
                continue
            edges.append(self.labels[arc])
            vertices.append(head)
        last_tail, _last_head = self.arcs[inner[-1]]
        edges.append(self.labels[inner[-1]])
        vertices.append(g.other_end(self.labels[inner[-1]], last_tail))
        path = Path(tuple(vertices), tuple(edges))
        path.validate(g)
        return path


def build_augmented(g: MultiGraph, grouping: InterfaceGrouping) -> AugmentedGraph:
    fresh = g.next_vertex
    hubs = tuple(range(fresh, fresh + len(grouping)))
    fresh += len(grouping)
    owners: Dict[EdgeId, List[int]] = {}
    for s in grouping.sets:
        for e in s.representatives:
            owners.setdefault(e, []).append(s.index)

    undirected: List[Tuple[VertexId, VertexId, Optional[EdgeId]]] = []
    mids: Dict[VertexId, Tuple[EdgeId, int]] = {}
    for e, (a, b) in g.edges.items():
        sets = owners.get(e, [])
        for copy in range(2):
            if copy < len(sets):
                mid = fresh
                fresh += 1
                mids[mid] = (e, sets[copy])
                undirected += [(a, mid, e), (mid, b, e), (mid, hubs[sets[copy]], None)]
            else:
                undirected.append((a, b, e))

    arcs: List[Arc] = []
    labels: List[Optional[EdgeId]] = []
    for u, v, label in undirected:
        arcs += [(u, v), (v, u)]
        labels += [label, label]
    return AugmentedGraph(tuple(arcs), tuple(labels), hubs, mids)


def _capacities(arcs: Mapping[int, Arc]) -> nx.DiGraph:
    cap = nx.DiGraph()
    for u, v in arcs.values():
        _bump(cap, u, v, 1)
    return cap


def _bump(cap: nx.DiGraph, u: VertexId, v: VertexId, delta: int) -> None:
    if cap.has_edge(u, v):
        cap[u][v]["capacity"] += delta
        if cap[u][v]["capacity"] == 0:
            cap.remove_edge(u, v)
    elif delta > 0:
        cap.add_edge(u, v, capacity=delta)
    else:
        raise InvariantViolation(f"arc ({u}, {v}) has no capacity left", stage=STAGE)


def _flow(cap: nx.DiGraph, y: VertexId, z: VertexId, cutoff: Optional[int] = None) -> Tuple[int, Counter]:
    if y not in cap or z not in cap:
        return 0, Counter()
    value, flow = nx.maximum_flow(cap, y, z, flow_func=shortest_augmenting_path, cutoff=cutoff)
    units = Counter({(a, b): f for a, row in flow.items() for b, f in row.items() if f > 0})
    return int(value), units


def arc_connectivity(arcs: Sequence[Arc], keep: Sequence[VertexId]) -> Dict[KeptPair, int]:
    """λ(y, y′) for every ordered pair of kept vertices"""
    cap = _capacities(dict(enumerate(arcs)))
    return {(y, z): _flow(cap, y, z)[0] for y, z in permutations(keep, 2)}


@dataclass
class SplitArc:
    tail: VertexId
    head: VertexId
    route: Tuple[int, ...]


@dataclass
class SplitResult:
    """Digraph on the kept vertices; every arc knows the original arcs it replaces"""

    arcs: Dict[int, SplitArc]
    targets: Dict[KeptPair, int]
    rounds: int = 0
    checks: int = 0
    recomputed: int = 0
    dropped_loops: int = 0
    preserved: Dict[KeptPair, bool] = field(default_factory=dict)

    def pairs(self) -> List[Arc]:
        return [(a.tail, a.head) for _, a in sorted(self.arcs.items())]


class _Certificates:
    """One feasible flow per checked pair, repaired locally after each split"""

    def __init__(self, cap: nx.DiGraph, targets: Mapping[KeptPair, int]):
        self.cap = cap
        self.targets = targets
        self.flows: Dict[KeptPair, Counter] = {}
        self.recomputed = 0

    def _fits(self, flow: Counter) -> bool:
        return all(self.cap.has_edge(a, b) and self.cap[a][b]["capacity"] >= f for (a, b), f in flow.items())

    def holds(self, pair: KeptPair, w: VertexId, v: VertexId, u: VertexId) -> Optional[Counter]:
        """Flow of the target value for ``pair`` after (w,v),(v,u) became (w,u), or None"""
        target = self.targets[pair]
        if target == 0:
            return Counter()
        flow = self.flows.get(pair)
        if flow is not None:
            repaired = Counter(flow)
            if repaired[(w, v)] > 0 and repaired[(v, u)] > 0:
                repaired[(w, v)] -= 1
                repaired[(v, u)] -= 1
                if w != u:
                    repaired[(w, u)] += 1
                repaired = +repaired
            if self._fits(repaired):
                return repaired
        self.recomputed += 1
        value, fresh = _flow(self.cap, *pair, cutoff=target)
        return fresh if value >= target else None


def split_off_eulerian(
    arcs: Sequence[Arc],
    keep: Sequence[VertexId],
    rng: Optional[np.random.Generator] = None,
    samples: Optional[int] = None,
    targets: Optional[Mapping[KeptPair, int]] = None,
) -> SplitResult:
    """Split off every vertex outside ``keep`` while preserving λ between kept vertices.

    At each vertex v the smallest outgoing arc a = (v,u) is paired with the
    first incoming arc b = (w,v), in id order, for which every checked
    pair keeps its connectivity. With ``samples`` set, each vertex round
    checks that many random kept pairs; otherwise all of them.
    """
    keep = tuple(keep)
    kept = set(keep)
    live: Dict[int, SplitArc] = {i: SplitArc(u, v, (i,)) for i, (u, v) in enumerate(arcs)}
    outs: Dict[VertexId, Set[int]] = {}
    ins: Dict[VertexId, Set[int]] = {}
    for i, (u, v) in enumerate(arcs):
        if u == v:
            raise PreconditionError(f"arc {i} is a loop at {u}", stage=STAGE)
        outs.setdefault(u, set()).add(i)
        ins.setdefault(v, set()).add(i)
    vertices = sorted(set(outs) | set(ins))
    unbalanced = [v for v in vertices if len(outs.get(v, ())) != len(ins.get(v, ()))]
    if unbalanced:
        raise PreconditionError(f"digraph is not Eulerian at {unbalanced[:5]}", stage=STAGE)

    cap = _capacities({i: (a.tail, a.head) for i, a in live.items()})
    all_pairs = list(permutations(keep, 2))
    if targets is None:
        targets = {pair: _flow(cap, *pair)[0] for pair in all_pairs}
    certs = _Certificates(cap, targets)
    result = SplitResult(arcs=live, targets=dict(targets))
    next_id = len(arcs)

    for v in vertices:
        if v in kept:
            continue
        result.rounds += 1
        if samples is not None and rng is not None and len(all_pairs) > samples:
            picked = sorted(int(i) for i in rng.choice(len(all_pairs), size=samples, replace=False))
            checked = [all_pairs[i] for i in picked]
        else:
            checked = all_pairs
        while outs.get(v):
            a = min(outs[v])
            u = live[a].head
            tried: Set[VertexId] = set()
            accepted = None
            # loops at a hub only as a last resort
            for b in sorted(ins[v], key=lambda arc: (live[arc].tail == u and u in kept, arc)):
                w = live[b].tail
                if w in tried:
                    continue
                tried.add(w)
                _bump(cap, w, v, -1)
                _bump(cap, v, u, -1)
                if w != u:
                    _bump(cap, w, u, 1)
                repaired = {}
                for pair in checked:
                    result.checks += 1
                    flow = certs.holds(pair, w, v, u)
                    if flow is None:
                        break
                    repaired[pair] = flow
                else:
                    accepted = b
                    certs.flows.update(repaired)
                    break
                if w != u:
                    _bump(cap, w, u, -1)
                _bump(cap, v, u, 1)
                _bump(cap, w, v, 1)
            if accepted is None:
                raise InvariantViolation(f"no companion arc for arc {a} at vertex {v} keeps connectivity", stage=STAGE)

            b = accepted
            w = live[b].tail
            route = live[b].route + live[a].route
            for arc in (a, b):
                outs[live[arc].tail].discard(arc)
                ins[live[arc].head].discard(arc)
                del live[arc]
            if w == u:
                result.dropped_loops += 1
                continue
            live[next_id] = SplitArc(w, u, route)
            outs.setdefault(w, set()).add(next_id)
            ins.setdefault(u, set()).add(next_id)
            next_id += 1

    final = _capacities({i: (a.tail, a.head) for i, a in live.items()})
    result.preserved = {pair: _flow(final, *pair)[0] >= targets[pair] for pair in all_pairs}
    result.recomputed = certs.recomputed
    logger.debug(
        f"Split off {result.rounds} vertices: {len(live)} arcs remain, {result.checks} pair checks, "
        f"{result.recomputed} flow recomputations, {result.dropped_loops} loops dropped"
    )
    return result


@dataclass(frozen=True)
class ZGraph:
    """Hub graph: an edge joins two hubs carrying at least ⌈ℓ/γ³⌉ parallel split edges"""

    gamma: int
    ell: int
    threshold: int
    multiplicity: Mapping[Tuple[int, int], int]

    @classmethod
    def build(cls, hub_pairs: Sequence[Tuple[int, int]], gamma: int, ell: int) -> "ZGraph":
        counts: Counter = Counter()
        for i, j in hub_pairs:
            if i == j:
                raise InvariantViolation(f"split edge is a loop at hub {i}", stage=STAGE)
            counts[(min(i, j), max(i, j))] += 1
        return cls(gamma, ell, math.ceil(Fraction(ell, gamma**3)), dict(counts))

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return sorted(pair for pair, count in self.multiplicity.items() if count >= self.threshold)

    def capacity(self, v: int) -> int:
        return sum(self.multiplicity[pair] for pair in self.edges if v in pair)

    def degree_in_split(self, v: int) -> int:
        return sum(count for pair, count in self.multiplicity.items() if v in pair)

    def capacity_bounds_hold(self, v: int) -> bool:
        low = (1 - Fraction(1, self.gamma**2)) * self.ell
        return low <= self.capacity(v) <= self.ell

    def pair_flows(self) -> Dict[Tuple[int, int], int]:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.gamma))
        for i, j in self.edges:
            graph.add_edge(i, j, capacity=self.multiplicity[(i, j)])
        return {
            (i, j): int(nx.maximum_flow_value(graph, i, j, flow_func=shortest_augmenting_path))
            for i in range(self.gamma)
            for j in range(i + 1, self.gamma)
        }

    def flow_floor(self) -> Fraction:
        return (1 - Fraction(1, self.gamma)) * self.ell


def degree_bounded_tree(n: int, edges: Sequence[Tuple[int, int]], max_degree: int = MAX_TREE_DEGREE) -> Optional[List[Tuple[int, int]]]:
    """Spanning tree with maximum degree ``max_degree`` by backtracking, or None"""
    if n <= 1:
        return []
    ordered = sorted(set((min(a, b), max(a, b)) for a, b in edges if a != b))
    failed: Set[Tuple[frozenset, Tuple[int, ...]]] = set()

    def grow(inside: Set[int], chosen: List[Tuple[int, int]], degree: List[int]) -> Optional[List[Tuple[int, int]]]:
        if len(inside) == n:
            return list(chosen)
        state = (frozenset(inside), tuple(degree))
        if state in failed:
            return None
        for a, b in ordered:
            if (a in inside) == (b in inside):
                continue
            old, new = (a, b) if a in inside else (b, a)
            if degree[old] >= max_degree:
                continue
            inside.add(new)
            chosen.append((a, b))
            degree[old] += 1
            degree[new] += 1
            found = grow(inside, chosen, degree)
            if found is not None:
                return found
            degree[old] -= 1
            degree[new] -= 1
            chosen.pop()
            inside.discard(new)
        failed.add(state)
        return None

    return grow({0}, [], [0] * n)


def check_spanning_tree(n: int, tree: Sequence[Tuple[int, int]], max_degree: int = MAX_TREE_DEGREE) -> Optional[str]:
    """Independent re-check: spanning, acyclic, degree bound; returns the problem or None"""
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(tree)
    if len(tree) != n - 1 or not nx.is_connected(graph):
        return "not a spanning tree"
    worst = max((d for _v, d in graph.degree()), default=0)
    if worst > max_degree:
        return f"degree {worst} exceeds {max_degree}"
    return None


def tree_root(n: int, tree: Sequence[Tuple[int, int]]) -> int:
    """Smallest degree-1 vertex of the tree"""
    if n == 1:
        return 0
    degree = Counter(v for edge in tree for v in edge)
    return min(v for v in range(n) if degree[v] == 1)


__all__ = [
    "AugmentedGraph",
    "SplitArc",
    "SplitResult",
    "ZGraph",
    "build_augmented",
    "arc_connectivity",
    "split_off_eulerian",
    "degree_bounded_tree",
    "check_spanning_tree",
    "tree_root",
    "DEFAULT_SPLIT_SAMPLES",
]
