# decomposition/grouping.py - Spanning-tree grouping of weighted vertices, terminals and edges
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set, Tuple, Union

from congroute.errors import InvariantViolation, MalformedInputError, PreconditionError
from congroute.graph.models import EdgeId, EdgeSubset, MultiGraph, VertexId

logger = logging.getLogger(__name__)

Weight = Union[int, Fraction]


@dataclass(frozen=True)
class Grouping:
    """Groups of weighted elements, each with its own tree in the host graph.

    Elements are vertices for group_by_tree and group_terminals, and edge
    ids for group_edges. ``undersized`` marks the single group returned when
    the total weight is below p.
    """

    p: int
    groups: Tuple[FrozenSet[int], ...]
    trees: Tuple[EdgeSubset, ...]
    weights: Tuple[Weight, ...]
    undersized: bool = False

    def __len__(self) -> int:
        return len(self.groups)

    def group_of(self, element: int) -> int:
        for index, group in enumerate(self.groups):
            if element in group:
                return index
        raise MalformedInputError(f"element {element} is not grouped")

    def verify(self, g: MultiGraph, elements: Iterable[int], edge_elements: bool = False) -> None:
        """Re-check the partition, weight bounds, spanning and edge-disjointness of the trees"""
        wanted = frozenset(elements)
        seen: Counter = Counter()
        for group in self.groups:
            seen.update(group)
        if set(seen) != wanted or any(count > 1 for count in seen.values()):
            raise InvariantViolation("groups do not partition the weighted elements", stage="grouping")
        if not self.undersized:
            bad = [w for w in self.weights if not self.p <= w <= 3 * self.p]
            if bad:
                raise InvariantViolation(f"group weights {bad} outside [{self.p}, {3 * self.p}]", stage="grouping")
        for group, tree in zip(self.groups, self.trees):
            touched = {v for eid in tree for v in g.endpoints(eid)}
            if edge_elements:
                missed = [eid for eid in group if not touched & set(g.endpoints(eid))]
            else:
                missed = [v for v in group if v not in touched] if tree else list(group)[1:]
            if missed:
                raise InvariantViolation(f"group tree misses elements {sorted(missed)[:5]}", stage="grouping")
        used: Counter = Counter()
        for tree in self.trees:
            used.update(tree)
            if tree:
                sub = g.edge_subgraph(tree)
                if not sub.is_connected() or sub.num_edges != sub.num_vertices - 1:
                    raise InvariantViolation("group tree is not a tree", stage="grouping")
        shared = [eid for eid, count in used.items() if count > 1]
        if shared:
            raise InvariantViolation(f"group trees share edges {sorted(shared)[:5]}", stage="grouping")


def _check(g: MultiGraph, weights: Mapping[VertexId, Weight], p: int) -> None:
    if p < 1:
        raise MalformedInputError(f"grouping parameter must be positive, got {p}")
    g.check_vertices(weights)
    if g.num_vertices == 0 or not g.is_connected():
        raise PreconditionError("grouping needs a connected graph", stage="grouping")
    heavy = [v for v, w in weights.items() if w > p]
    if heavy:
        raise PreconditionError(f"vertices {sorted(heavy)[:5]} weigh more than p={p}", stage="grouping")
    if any(w < 0 for w in weights.values()):
        raise MalformedInputError("grouping weights must be non-negative")


def _tree_walk(g: MultiGraph, weights: Mapping[VertexId, Weight], p: int) -> List[Tuple[Set[VertexId], Set[EdgeId]]]:
    """Peel groups of weight in [p, 2p] off the BFS tree until at most 3p remains"""
    root = min(g.vertices)
    parent = g.spanning_tree_edges(root)
    children: Dict[VertexId, List[VertexId]] = {v: [] for v in g.vertices}
    for child, (par, _eid) in sorted(parent.items()):
        children[par].append(child)
    depth = {root: 0}
    for v in _preorder(root, children):
        for c in children[v]:
            depth[c] = depth[v] + 1

    alive = set(g.vertices)
    groups: List[Tuple[Set[VertexId], Set[EdgeId]]] = []

    def subtree(v: VertexId) -> List[VertexId]:
        return [u for u in _preorder(v, children) if u in alive]

    def weight_of(vs: Iterable[VertexId]) -> Weight:
        return sum(weights.get(u, 0) for u in vs)

    while weight_of(alive) > 3 * p:
        totals = {v: weight_of(subtree(v)) for v in alive}
        v = min((u for u in alive if totals[u] > p), key=lambda u: (-depth[u], u))
        members: Set[VertexId] = set()
        edges: Set[EdgeId] = set()
        acc = 0
        for c in children[v]:
            if c not in alive:
                continue
            part = subtree(c)
            members.update(part)
            edges.update(parent[u][1] for u in part)
            acc += totals[c]
            if acc >= p:
                break
        if acc >= p:
            children[v] = [c for c in children[v] if c not in members]
        else:
            members = set(subtree(v))
            edges = {parent[u][1] for u in members if u != v}
            if v != root:
                children[parent[v][0]].remove(v)
        alive -= members
        groups.append((members, edges))

    remaining_edges = {parent[u][1] for u in alive if u != root}
    groups.append((set(alive), remaining_edges))
    return groups


def _preorder(root: VertexId, children: Mapping[VertexId, List[VertexId]]) -> List[VertexId]:
    order, stack = [], [root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(children[v]))
    return order


def group_by_tree(g: MultiGraph, weights: Mapping[VertexId, Weight], p: int) -> Grouping:
    """Group the positive-weight vertices into sets of weight in [p, 3p] with edge-disjoint trees"""
    _check(g, weights, p)
    total = sum(weights.values())
    elements = frozenset(v for v, w in weights.items() if w > 0)
    if total <= 3 * p:
        edges = frozenset(eid for _par, eid in g.spanning_tree_edges(min(g.vertices)).values())
        grouping = Grouping(p, (elements,), (edges,), (total,), undersized=total < p)
        grouping.verify(g, elements)
        return grouping

    raw = _tree_walk(g, weights, p)
    groups = tuple(frozenset(v for v in members if weights.get(v, 0) > 0) for members, _ in raw)
    trees = tuple(frozenset(edges) for _, edges in raw)
    grouping = Grouping(p, groups, trees, tuple(sum(weights.get(v, 0) for v in grp) for grp in groups))
    grouping.verify(g, elements)
    logger.debug(f"Grouped weight {total} into {len(groups)} groups with p={p}")
    return grouping


def group_terminals(g: MultiGraph, terminals: Iterable[VertexId], p: int) -> Grouping:
    """Unit-weight terminals, every other vertex weighs zero"""
    chosen = g.check_vertices(terminals)
    return group_by_tree(g, {v: 1 if v in chosen else 0 for v in g.vertices}, p)


def group_edges(g: MultiGraph, e: Iterable[EdgeId], p: int) -> Grouping:
    """Group edge ids by subdividing each with a unit-weight vertex.

    Trees are projected back onto the host edges. A grouped edge stays in
    its own group's tree only, and each projected tree is re-spanned so it
    remains a tree in the original graph.
    """
    chosen = g.check_edges(e)
    if not chosen:
        raise MalformedInputError("cannot group an empty edge set")
    sub, mid_of, host_of = g.subdivide(chosen)
    edge_of = {mid: eid for eid, mid in mid_of.items()}
    inner = group_by_tree(sub, {v: 1 if v in edge_of else 0 for v in sub.vertices}, p)

    groups = tuple(frozenset(edge_of[mid] for mid in grp) for grp in inner.groups)
    owner = {eid: index for index, grp in enumerate(groups) for eid in grp}
    trees = []
    for index, tree in enumerate(inner.trees):
        projected = {host_of[h] for h in tree} | set(groups[index])
        projected = {eid for eid in projected if owner.get(eid, index) == index}
        span = g.edge_subgraph(projected)
        if span.num_edges == 0:
            trees.append(frozenset())
            continue
        root = min(span.vertices)
        trees.append(frozenset(eid for _par, eid in span.spanning_tree_edges(root).values()))

    grouping = Grouping(p, groups, tuple(trees), tuple(len(grp) for grp in groups), undersized=inner.undersized)
    grouping.verify(g, chosen, edge_elements=True)
    return grouping


__all__ = ["Weight", "Grouping", "group_by_tree", "group_terminals", "group_edges"]
