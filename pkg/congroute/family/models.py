# family/models.py - Good subsets, good families and the outcomes of processing a cluster
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

from congroute.cuts.oracle import ViolatingCut
from congroute.decomposition.welllinked import Decomposition
from congroute.errors import InvariantViolation
from congroute.graph.models import EdgeId, EdgeSubset, MultiGraph, PathSet, VertexId, VertexSubset


@dataclass(frozen=True)
class GoodSubset:
    """Vertex set S with k1 boundary edges Γ that route to distinct terminals.

    ``certificate`` holds one path per edge of Γ: it starts inside S,
    leaves through its Γ edge and ends at a terminal.
    """

    vertices: VertexSubset
    interface: EdgeSubset
    certificate: PathSet

    def terminal_of(self) -> Dict[EdgeId, VertexId]:
        return {path.first_edge: path.target for path in self.certificate}

    def verify(self, g: MultiGraph, terminals: VertexSubset, k1: int, eta: int) -> None:
        stage = "good-family"
        if self.vertices & terminals:
            raise InvariantViolation("good subset contains terminals", stage=stage)
        if len(self.interface) != k1:
            raise InvariantViolation(f"|Γ|={len(self.interface)} differs from k1={k1}", stage=stage)
        if not self.interface <= g.out_edges(self.vertices):
            raise InvariantViolation("Γ is not contained in out(S)", stage=stage)
        self.certificate.validate(g)
        firsts = [path.first_edge for path in self.certificate]
        if len(firsts) != k1 or set(firsts) != set(self.interface):
            raise InvariantViolation("certificate paths do not start on the edges of Γ one-to-one", stage=stage)
        if any(path.source not in self.vertices for path in self.certificate):
            raise InvariantViolation("certificate path starts outside S", stage=stage)
        targets = [path.target for path in self.certificate]
        if not set(targets) <= terminals or len(set(targets)) != len(targets):
            raise InvariantViolation("certificate does not reach distinct terminals", stage=stage)
        load = self.certificate.congestion()
        if load > eta:
            raise InvariantViolation(f"certificate congestion {load} exceeds {eta}", stage=stage)


@dataclass(frozen=True)
class GoodFamily:
    sets: Tuple[GoodSubset, ...]
    k1: int
    eta: int
    rounds: int = 0

    def __len__(self) -> int:
        return len(self.sets)

    def verify(self, g: MultiGraph, terminals: VertexSubset, gamma: int) -> None:
        """Independent re-check of every good-family invariant"""
        if len(self.sets) != gamma:
            raise InvariantViolation(f"family has {len(self.sets)} sets, expected {gamma}", stage="good-family")
        seen: set = set()
        for subset in self.sets:
            if seen & subset.vertices:
                raise InvariantViolation("good subsets are not disjoint", stage="good-family")
            seen |= subset.vertices
            subset.verify(g, terminals, self.k1, self.eta)


@dataclass(frozen=True)
class Good:
    subset: GoodSubset


@dataclass(frozen=True)
class Split:
    cluster: VertexSubset
    cut: ViolatingCut


@dataclass(frozen=True)
class Deactivated:
    """Case-2 outcome: the cut side A was decomposed and the clusters in it went inactive"""

    cluster: VertexSubset
    side: VertexSubset
    decomposition: Decomposition
    moved: Tuple[VertexSubset, ...] = ()


Outcome = Union[Good, Split, Deactivated]


@dataclass
class SearchState:
    """The almost-legal contracted graph of one partitioning procedure.

    Every active cluster is a single vertex of ``current``; inactive
    clusters are kept for accounting only.
    """

    base: MultiGraph
    terminals: VertexSubset
    current: MultiGraph
    active: List[VertexSubset]
    inactive: List[VertexSubset] = field(default_factory=list)
    responsible: List[Tuple[VertexSubset, VertexSubset, Decomposition]] = field(default_factory=list)
    splits: int = 0

    def node_of(self, cluster: VertexSubset) -> VertexId:
        return self.current.owner[min(cluster)]


__all__ = ["GoodSubset", "GoodFamily", "Good", "Split", "Deactivated", "Outcome", "SearchState"]
