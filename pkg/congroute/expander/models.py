# expander/models.py - Interface groupings, tree families and the embedded expander
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from congroute.decomposition.grouping import Grouping
from congroute.errors import InvariantViolation
from congroute.graph.models import EdgeId, EdgeSubset, MultiGraph, Path, PathSet, VertexId, VertexSubset

STAGE = "expander-build"

TREE_LOAD_LIMIT = 8
COMPONENT_LOAD_LIMIT = 12
EMBEDDING_CONGESTION = 2


@dataclass(frozen=True)
class SetInterface:
    """Grouping of one good subset's interface Γ_j and its k* representatives Γ′_j"""

    index: int
    vertices: VertexSubset
    interface: EdgeSubset
    grouping: Grouping
    representatives: Tuple[EdgeId, ...]
    subgroups: Mapping[EdgeId, EdgeSubset]
    trees: Mapping[EdgeId, EdgeSubset]
    host: MultiGraph = field(compare=False, repr=False)
    real_of: Mapping[VertexId, VertexId] = field(default_factory=dict, compare=False, repr=False)

    def verify(self, p: int, k_star: int) -> None:
        """Checked in the routing host G[S_j] with every boundary edge on a private stub"""
        self.grouping.verify(self.host, self.interface, edge_elements=True)
        if len(self.representatives) != k_star or len(set(self.representatives)) != k_star:
            raise InvariantViolation(
                f"set {self.index} keeps {len(self.representatives)} representatives, expected {k_star}", stage=STAGE
            )
        if not set(self.representatives) <= self.interface:
            raise InvariantViolation(f"set {self.index} has representatives outside Γ", stage=STAGE)
        for e in self.representatives:
            sub = self.subgroups[e]
            if len(sub) != p or e not in sub:
                raise InvariantViolation(f"subgroup of edge {e} has {len(sub)} edges or misses it", stage=STAGE)
            index = self.grouping.group_of(e)
            if not sub <= self.grouping.groups[index]:
                raise InvariantViolation(f"subgroup of edge {e} leaves its group", stage=STAGE)
            if self.trees[e] != self.grouping.trees[index]:
                raise InvariantViolation(f"edge {e} is not paired with its group tree", stage=STAGE)


@dataclass(frozen=True)
class InterfaceGrouping:
    sets: Tuple[SetInterface, ...]
    p: int
    k_star: int

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, j: int) -> SetInterface:
        return self.sets[j]

    def verify(self) -> None:
        for s in self.sets:
            s.verify(self.p, self.k_star)


@dataclass(frozen=True)
class TreeFamily:
    """k′ trees of G; tree i holds one special edge e_{i,j} of every Γ′_j"""

    trees: Tuple[EdgeSubset, ...]
    special: Tuple[Tuple[EdgeId, ...], ...]
    z_edges: Tuple[Tuple[int, int], ...] = ()
    root: int = 0

    def __len__(self) -> int:
        return len(self.trees)

    def gamma_star(self, j: int) -> Tuple[EdgeId, ...]:
        return tuple(row[j] for row in self.special)

    def tree_load(self) -> Counter:
        load: Counter = Counter()
        for tree in self.trees:
            load.update(tree)
        return load

    def verify(self, g: MultiGraph, grouping: InterfaceGrouping, k_prime: int) -> None:
        if len(self.trees) != k_prime or len(self.special) != k_prime:
            raise InvariantViolation(f"tree family has {len(self.trees)} trees, expected {k_prime}", stage=STAGE)
        load = self.tree_load()
        worst = max(load.values(), default=0)
        if worst > TREE_LOAD_LIMIT:
            edge = max(load, key=lambda e: (load[e], -e))
            raise InvariantViolation(f"edge {edge} lies in {worst} trees", stage=STAGE, edge_id=edge)
        seen: set = set()
        for i, (tree, row) in enumerate(zip(self.trees, self.special)):
            if len(row) != len(grouping):
                raise InvariantViolation(f"tree {i} has {len(row)} special edges", stage=STAGE)
            if seen & set(row):
                raise InvariantViolation(f"special edge sets of tree {i} overlap an earlier tree", stage=STAGE)
            seen.update(row)
            for j, e in enumerate(row):
                if e not in grouping[j].representatives:
                    raise InvariantViolation(f"special edge {e} of tree {i} is not in Γ′_{j}", stage=STAGE)
                if e not in tree:
                    raise InvariantViolation(f"tree {i} misses its special edge {e}", stage=STAGE)
            sub = g.edge_subgraph(tree)
            if not sub.is_connected() or sub.num_edges != sub.num_vertices - 1:
                raise InvariantViolation(f"tree {i} is not a tree", stage=STAGE)
        for j in range(len(grouping)):
            column = self.gamma_star(j)
            if len(set(column)) != len(column):
                raise InvariantViolation(f"Γ*_{j} repeats an edge", stage=STAGE)


@dataclass(frozen=True)
class EmbeddedExpander:
    """Expander X on k′ vertices embedded in G.

    Vertex i of X is represented by the connected edge set ``components[i]``
    which contains terminal ``terminals[i]``; every edge of X is a
    matching pair with its path in G joining the two components.
    """

    terminals: Tuple[VertexId, ...]
    components: Tuple[EdgeSubset, ...]
    matchings: Tuple[Tuple[Tuple[int, int], ...], ...]
    paths: Tuple[Path, ...]
    expansion: Optional[float] = None
    expansion_exact: bool = False
    events: List[Dict[str, object]] = field(default_factory=list, compare=False)

    @property
    def size(self) -> int:
        return len(self.terminals)

    @property
    def edges(self) -> Tuple[Tuple[int, int], ...]:
        """X edges in id order; edge id = position, path = paths[id]"""
        return tuple(pair for matching in self.matchings for pair in matching)

    def graph(self) -> MultiGraph:
        return MultiGraph(range(self.size), dict(enumerate(self.edges)))

    def degree(self) -> int:
        counts: Counter = Counter()
        for a, b in self.edges:
            counts.update((a, b))
        return max(counts.values(), default=0)

    def component_load(self) -> Counter:
        load: Counter = Counter()
        for comp in self.components:
            load.update(comp)
        return load

    def vertices_of(self, g: MultiGraph, i: int) -> VertexSubset:
        comp = self.components[i]
        if not comp:
            return frozenset((self.terminals[i],))
        return g.edge_subgraph(comp).vertices

    def verify(self, g: MultiGraph, gamma: int) -> None:
        load = self.component_load()
        worst = max(load.values(), default=0)
        if worst > COMPONENT_LOAD_LIMIT:
            edge = max(load, key=lambda e: (load[e], -e))
            raise InvariantViolation(f"edge {edge} lies in {worst} components", stage=STAGE, edge_id=edge)
        embedding = PathSet.of(self.paths)
        embedding.validate(g)
        if embedding.congestion() > EMBEDDING_CONGESTION:
            raise InvariantViolation(f"embedding paths have congestion {embedding.congestion()}", stage=STAGE)
        if len(self.matchings) > gamma or self.degree() > gamma:
            raise InvariantViolation(f"X has degree {self.degree()} above γ={gamma}", stage=STAGE)
        for i, t in enumerate(self.terminals):
            vertices = self.vertices_of(g, i)
            if t not in vertices:
                raise InvariantViolation(f"terminal {t} is outside its component", stage=STAGE)
            if self.components[i] and not g.edge_subgraph(self.components[i]).is_connected():
                raise InvariantViolation(f"component {i} is disconnected", stage=STAGE)
        for eid, ((a, b), path) in enumerate(zip(self.edges, self.paths)):
            if path.source not in self.vertices_of(g, a) or path.target not in self.vertices_of(g, b):
                raise InvariantViolation(f"path of X edge {eid} does not join components {a} and {b}", stage=STAGE)


__all__ = [
    "SetInterface",
    "InterfaceGrouping",
    "TreeFamily",
    "EmbeddedExpander",
    "TREE_LOAD_LIMIT",
    "COMPONENT_LOAD_LIMIT",
    "EMBEDDING_CONGESTION",
]
