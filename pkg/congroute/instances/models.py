# instances/models.py - Routing instances, sub-instances and the normalization back-map
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from congroute.errors import MalformedInputError
from congroute.graph.models import EdgeId, MultiGraph, Path, VertexId, VertexSubset

Pair = Tuple[VertexId, VertexId]

MAX_DEGREE = 4


@dataclass(frozen=True)
class Instance:
    """Graph plus demand pairs; a normalized instance also knows how to map routes back.

    ``vertex_origin`` sends every vertex of this graph to the vertex of the
    original graph it stands for, and ``edge_origin`` sends every edge id to
    its original edge id, or to None for gadget edges.
    """

    graph: MultiGraph
    pairs: Tuple[Pair, ...]
    vertex_origin: Mapping[VertexId, VertexId] = field(default_factory=dict)
    edge_origin: Mapping[EdgeId, Optional[EdgeId]] = field(default_factory=dict)
    original: Optional["Instance"] = None

    def __post_init__(self):
        for s, t in self.pairs:
            self.graph.check_vertices((s, t))
            if s == t:
                raise MalformedInputError(f"demand pair with identical endpoints {s}")

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def terminals(self) -> VertexSubset:
        return frozenset(v for pair in self.pairs for v in pair)

    def terminal_violations(self) -> List[str]:
        """Reasons this instance is not normalized; empty when it is"""
        problems = []
        uses: Dict[VertexId, int] = {}
        for pair in self.pairs:
            for v in pair:
                uses[v] = uses.get(v, 0) + 1
        for v, count in sorted(uses.items()):
            if count > 1:
                problems.append(f"terminal {v} is in {count} pairs")
            if self.graph.degree(v) != 1:
                problems.append(f"terminal {v} has degree {self.graph.degree(v)}")
        if self.graph.num_vertices and self.graph.max_degree() > MAX_DEGREE:
            problems.append(f"maximum degree {self.graph.max_degree()} exceeds {MAX_DEGREE}")
        return problems

    @property
    def is_normalized(self) -> bool:
        return not self.terminal_violations()

    def origin_pair(self, index: int) -> Pair:
        s, t = self.pairs[index]
        return self.vertex_origin.get(s, s), self.vertex_origin.get(t, t)

    def map_back(self, path: Path) -> Path:
        """Project a path of this graph onto the original graph, then shortcut it.

        Gadget edges collapse onto the vertex they replace, so the result
        uses a subset of the original edges the path used.
        """
        if self.original is None:
            return path
        vertices = [self.vertex_origin.get(path.vertices[0], path.vertices[0])]
        edges: List[EdgeId] = []
        for eid, nxt in zip(path.edges, path.vertices[1:]):
            origin = self.edge_origin.get(eid, eid)
            if origin is None:
                continue
            edges.append(origin)
            vertices.append(self.vertex_origin.get(nxt, nxt))
        mapped = Path(tuple(vertices), tuple(edges)).shortcut()
        mapped.validate(self.original.graph)
        return mapped


@dataclass
class SubInstance:
    """One flow-well-linked piece: induced subgraph, its pairs and terminal weights"""

    graph: MultiGraph
    candidates: Tuple[Pair, ...]
    weights: Dict[VertexId, Fraction]
    pairs: Tuple[Pair, ...] = ()
    sparsity: Optional[Fraction] = None
    product_sparsity: Optional[Fraction] = None
    charge_ledger: List[Tuple[Pair, Fraction, bool]] = field(default_factory=list)
    spotchecks: List[Tuple[Tuple[Pair, ...], str]] = field(default_factory=list)

    @property
    def terminals(self) -> VertexSubset:
        return frozenset(v for pair in self.pairs for v in pair)

    @property
    def candidate_weight(self) -> Fraction:
        return sum((self.weights.get(v, Fraction(0)) for pair in self.candidates for v in pair), Fraction(0))

    def as_instance(self) -> Instance:
        return Instance(self.graph, tuple(self.pairs))


def pair_index(pairs: Sequence[Pair]) -> Dict[VertexId, int]:
    """terminal -> index of its pair; valid for normalized pair lists"""
    index: Dict[VertexId, int] = {}
    for i, (s, t) in enumerate(pairs):
        index[s] = i
        index[t] = i
    return index


__all__ = ["Instance", "SubInstance", "Pair", "pair_index", "MAX_DEGREE"]
