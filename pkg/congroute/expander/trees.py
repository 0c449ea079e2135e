# expander/trees.py - Tree family from the split hub graph: graph Z, its degree-3 tree, bundles and assembly
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Set, Tuple

import networkx as nx
import numpy as np

from congroute.errors import InvariantViolation, ParameterDegeneracyError, RouteEscalation
from congroute.expander.interfaces import route_between, route_within
from congroute.expander.models import STAGE, InterfaceGrouping, TreeFamily
from congroute.expander.splitting import (
    DEFAULT_SPLIT_SAMPLES,
    ZGraph,
    arc_connectivity,
    build_augmented,
    check_spanning_tree,
    degree_bounded_tree,
    split_off_eulerian,
    tree_root,
)
from congroute.family.params import ParamTable
from congroute.graph.models import EdgeId, MultiGraph, Path
from congroute.monitoring import StageMonitor

logger = logging.getLogger(__name__)

FIRST_EDGE_REUSE = 2


@dataclass(frozen=True)
class HubEdge:
    """Split edge between hubs ``tail`` and ``head`` with its G-walk, oriented tail to head"""

    arc: int
    tail: int
    head: int
    path: Path

    def oriented_from(self, hub: int) -> Path:
        return self.path if self.tail == hub else self.path.reversed()


@dataclass(frozen=True)
class Bundle:
    """k′ walks from Γ′ of a child hub to Γ′ of its parent with distinct first and distinct last edges"""

    child: int
    parent: int
    paths: Tuple[Path, ...]

    @property
    def firsts(self) -> Tuple[EdgeId, ...]:
        return tuple(p.first_edge for p in self.paths)

    @property
    def lasts(self) -> Tuple[EdgeId, ...]:
        return tuple(p.last_edge for p in self.paths)


def split_hub_edges(
    g: MultiGraph,
    grouping: InterfaceGrouping,
    k_star: int,
    rng: Optional[np.random.Generator],
    samples: Optional[int],
    monitor: StageMonitor,
) -> List[HubEdge]:
    aug = build_augmented(g, grouping)
    targets = arc_connectivity(aug.arcs, aug.hubs)
    short = {pair: value for pair, value in targets.items() if value < k_star}
    if short:
        (y, z), value = min(short.items())
        raise RouteEscalation(
            f"hubs {aug.hub_index(y)} and {aug.hub_index(z)} are only {value}-connected, need k*={k_star}",
            stage=STAGE,
        )
    split = split_off_eulerian(aug.arcs, aug.hubs, rng=rng, samples=samples, targets=targets)
    monitor.check(
        "splitting-off preserves hub connectivity",
        all(split.preserved.values()),
        f"{sum(split.preserved.values())}/{len(split.preserved)} pairs, {split.checks} checks in {split.rounds} rounds",
        stage=STAGE,
        hard=samples is None,
    )
    edges = [
        HubEdge(arc_id, aug.hub_index(arc.tail), aug.hub_index(arc.head), aug.realize(g, arc.route))
        for arc_id, arc in sorted(split.arcs.items())
    ]
    disjoint = Counter(a for arc in split.arcs.values() for a in arc.route)
    monitor.check(
        "split routes are arc-disjoint",
        max(disjoint.values(), default=0) <= 1,
        f"{len(edges)} split edges",
        stage=STAGE,
    )
    return edges


def build_bundle(child: int, parent: int, edges: List[HubEdge], k_prime: int, monitor: StageMonitor) -> Bundle:
    """All split edges between the two hubs, oriented child to parent, de-duplicated, first k′ kept"""
    walks = [e.oriented_from(child) for e in edges if {e.tail, e.head} == {child, parent}]
    starts = Counter(w.first_edge for w in walks)
    ends = Counter(w.last_edge for w in walks)
    worst = max(list(starts.values()) + list(ends.values()), default=0)
    monitor.check(
        "interface edge starts at most two bundle walks",
        worst <= FIRST_EDGE_REUSE,
        f"hubs {child}->{parent}, worst reuse {worst}",
        stage=STAGE,
    )
    firsts: Set[EdgeId] = set()
    lasts: Set[EdgeId] = set()
    kept: List[Path] = []
    for walk in walks:
        if walk.first_edge in firsts or walk.last_edge in lasts:
            continue
        firsts.add(walk.first_edge)
        lasts.add(walk.last_edge)
        kept.append(walk)
    if len(kept) < k_prime:
        raise ParameterDegeneracyError(
            f"bundle {child}->{parent} keeps {len(kept)} walks of {len(walks)}, below k′={k_prime}", stage=STAGE
        )
    return Bundle(child, parent, tuple(kept[:k_prime]))


def _spanning_with_specials(g: MultiGraph, edges: Set[EdgeId], specials: Set[EdgeId]) -> frozenset:
    """Kruskal on the union, special edges first; a rejected special edge is an error"""
    forest = nx.utils.UnionFind()
    tree: Set[EdgeId] = set()
    for eid in sorted(specials) + sorted(edges - specials):
        a, b = g.endpoints(eid)
        if forest[a] == forest[b]:
            if eid in specials:
                raise InvariantViolation(f"special edges close a cycle at edge {eid}", stage=STAGE)
            continue
        forest.union(a, b)
        tree.add(eid)
    return frozenset(tree)


def _assemble(
    g: MultiGraph,
    grouping: InterfaceGrouping,
    tree: List[Tuple[int, int]],
    root: int,
    bundles: Mapping[int, Bundle],
) -> Dict[EdgeId, Tuple[Set[EdgeId], Dict[int, EdgeId]]]:
    """Bottom-up over T*: every hub ends with one partial tree per edge of its Γ*"""
    adjacency: Dict[int, List[int]] = {v: [] for v in range(len(grouping))}
    for a, b in tree:
        adjacency[a].append(b)
        adjacency[b].append(a)
    order = list(nx.dfs_postorder_nodes(nx.Graph(tree), source=root)) if tree else [root]
    parent = {root: None}
    for v in reversed(order):
        for c in adjacency[v]:
            if c not in parent:
                parent[c] = v

    built: Dict[int, Dict[EdgeId, Tuple[Set[EdgeId], Dict[int, EdgeId]]]] = {}
    for v in order:
        children = sorted(c for c in adjacency[v] if parent.get(c) == v)
        if v == root:
            gamma_star = bundles[children[0]].lasts
        else:
            gamma_star = bundles[v].firsts
        partial = {e: ({e}, {v: e}) for e in gamma_star}
        for c in children:
            bundle = bundles[c]
            if v == root:
                joins = {x: None for x in bundle.lasts}
            else:
                joins = {p.first_edge: p for p in route_within(grouping[v], bundle.lasts, gamma_star)}
            for walk in bundle.paths:
                edges, specials = built[c][walk.first_edge]
                link = joins[walk.last_edge]
                target = walk.last_edge if link is None else link.last_edge
                acc_edges, acc_specials = partial[target]
                acc_edges.update(edges)
                acc_edges.update(walk.edges)
                if link is not None:
                    acc_edges.update(link.edges)
                acc_specials.update(specials)
        for e, (edges, specials) in partial.items():
            partial[e] = (set(_spanning_with_specials(g, edges, set(specials.values()))), specials)
        built[v] = partial
        for c in children:
            del built[c]
    return built[root]


def build_trees(
    g: MultiGraph,
    grouping: InterfaceGrouping,
    params: ParamTable,
    rng: Optional[np.random.Generator] = None,
    monitor: Optional[StageMonitor] = None,
    samples: Optional[int] = DEFAULT_SPLIT_SAMPLES,
) -> TreeFamily:
    """k′ trees, each carrying one special edge of every Γ′_j, with every edge of G in at most 8 of them.

    With ``samples=None`` splitting-off checks every hub pair in every round.
    """
    monitor = monitor or StageMonitor()
    gamma, k_prime = len(grouping), params.k_prime
    if gamma == 1:
        reps = grouping[0].representatives[:k_prime]
        if len(reps) < k_prime:
            raise ParameterDegeneracyError(f"Γ′ has {len(reps)} edges, below k′={k_prime}", stage=STAGE)
        family = TreeFamily(tuple(frozenset((e,)) for e in reps), tuple((e,) for e in reps))
        family.verify(g, grouping, k_prime)
        return family

    for j in range(gamma - 1):
        route_between(g, grouping[j].representatives, grouping[j + 1].representatives)
    edges = split_hub_edges(g, grouping, params.k_star, rng, samples, monitor)

    ell = params.path_length
    z = ZGraph.build([(e.tail, e.head) for e in edges], gamma, ell)
    for v in range(gamma):
        monitor.check(
            "hub degree in the split graph is ℓ",
            z.degree_in_split(v) == ell,
            f"hub {v}: {z.degree_in_split(v)} vs ℓ={ell}",
            stage=STAGE,
        )
        monitor.check(
            "Z capacity within [(1-1/γ²)ℓ, ℓ]",
            z.capacity_bounds_hold(v),
            f"hub {v}: C={z.capacity(v)}, ℓ={ell}",
            stage=STAGE,
        )
    flows = z.pair_flows()
    floor = z.flow_floor()
    monitor.check(
        "Z pair flows reach (1-1/γ)ℓ",
        all(value >= floor for value in flows.values()),
        f"min flow {min(flows.values(), default=0)} vs {float(floor):.2f}",
        stage=STAGE,
        hard=False,
    )

    tree = degree_bounded_tree(gamma, z.edges)
    if tree is None:
        raise InvariantViolation(f"Z has no spanning tree of degree at most 3 ({len(z.edges)} edges)", stage=STAGE)
    problem = check_spanning_tree(gamma, tree)
    monitor.check("degree-3 spanning tree of Z", problem is None, problem or f"{len(tree)} edges", stage=STAGE)
    root = tree_root(gamma, tree)

    bundles: Dict[int, Bundle] = {}
    graph = nx.Graph(tree)
    for parent, child in nx.bfs_edges(graph, root):
        bundles[child] = build_bundle(child, parent, edges, k_prime, monitor)

    assembled = _assemble(g, grouping, tree, root, bundles)
    rows = sorted(((specials, frozenset(edges)) for edges, specials in assembled.values()), key=lambda r: r[0][0])
    family = TreeFamily(
        trees=tuple(t for _specials, t in rows),
        special=tuple(tuple(specials[j] for j in range(gamma)) for specials, _t in rows),
        z_edges=tuple(tree),
        root=root,
    )
    family.verify(g, grouping, k_prime)
    load = family.tree_load()
    monitor.check(
        "edge in at most 8 trees",
        max(load.values(), default=0) <= 8,
        f"max tree load {max(load.values(), default=0)}",
        stage=STAGE,
    )
    logger.debug(f"Tree family: {k_prime} trees over {gamma} hubs, Z tree {tree} rooted at {root}")
    return family


__all__ = ["HubEdge", "Bundle", "split_hub_edges", "build_bundle", "build_trees"]
