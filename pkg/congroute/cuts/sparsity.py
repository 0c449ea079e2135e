# cuts/sparsity.py - Sparsity of terminal-weighted cuts
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, Iterable, Mapping, Optional, Tuple

from congroute.cuts.spectral import fiedler_order
from congroute.errors import DegenerateCutError, MalformedInputError
from congroute.graph.models import EdgeId, MultiGraph, VertexId

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class SparsestCutInstance:
    """Host graph plus non-negative terminal weights (zero off the terminals)"""

    graph: MultiGraph
    weights: Mapping[VertexId, Fraction]
    terminal_edges: Mapping[VertexId, EdgeId] = field(default_factory=dict)

    def __post_init__(self):
        self.graph.check_vertices(self.weights)
        if any(w < 0 for w in self.weights.values()):
            raise MalformedInputError("terminal weights must be non-negative")
        if not any(w > 0 for w in self.weights.values()):
            raise MalformedInputError("sparsest-cut instance needs a terminal of positive weight")

    @classmethod
    def uniform(cls, g: MultiGraph, terminals: Iterable[VertexId]) -> "SparsestCutInstance":
        return cls(g, {v: Fraction(1) for v in terminals})

    @classmethod
    def edge_terminals(cls, g: MultiGraph, s: Iterable[VertexId], terminals: Optional[Iterable[EdgeId]] = None) -> "SparsestCutInstance":
        """G[S] ∪ out(S) with every terminal edge subdivided by a unit-weight vertex"""
        subset = g.check_vertices(s)
        chosen = g.out_edges(subset) if terminals is None else g.check_edges(terminals)
        host = g.with_boundary(subset)
        subdivided, mid_of, _host_of = host.subdivide(chosen)
        return cls(subdivided, {mid: Fraction(1) for mid in mid_of.values()}, {mid: eid for eid, mid in mid_of.items()})

    @property
    def total_weight(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def weight(self, side: Iterable[VertexId]) -> Fraction:
        return sum((self.weights.get(v, Fraction(0)) for v in side), Fraction(0))


def _sides(inst: SparsestCutInstance, cut: Iterable[VertexId]) -> Tuple[FrozenSet[VertexId], Fraction, Fraction]:
    side = inst.graph.check_vertices(cut)
    inside = inst.weight(side)
    outside = inst.total_weight - inside
    if inside == 0 or outside == 0:
        raise DegenerateCutError("cut puts zero terminal weight on one side", stage="cut-oracle")
    return side, inside, outside


def sparsity(inst: SparsestCutInstance, cut: Iterable[VertexId]) -> Fraction:
    """Ψ(S, S̄) = |E(S, S̄)| / min(w(S), w(S̄))"""
    side, inside, outside = _sides(inst, cut)
    return Fraction(len(inst.graph.out_edges(side))) / min(inside, outside)


def product_sparsity(inst: SparsestCutInstance, cut: Iterable[VertexId]) -> Fraction:
    """Φ(S, S̄) = |E(S, S̄)| / (w(S)·w(S̄))"""
    side, inside, outside = _sides(inst, cut)
    return Fraction(len(inst.graph.out_edges(side))) / (inside * outside)


def brute_force_sparsest(inst: SparsestCutInstance) -> Tuple[Fraction, FrozenSet[VertexId]]:
    """Exact Ψ(G) by enumerating every cut; the side containing the smallest vertex is returned"""
    g = inst.graph
    order = g.sorted_vertices()
    n = len(order)
    if n > BRUTE_FORCE_LIMIT:
        raise MalformedInputError(f"brute-force sparsest cut limited to {BRUTE_FORCE_LIMIT} vertices")
    best: Optional[Fraction] = None
    best_side: FrozenSet[VertexId] = frozenset()
    for mask in range(1, 1 << (n - 1)):
        side = frozenset(order[i] for i in range(n) if (mask << 1 | 1) >> i & 1)
        if len(side) == n:
            continue
        try:
            value = sparsity(inst, side)
        except DegenerateCutError:
            continue
        key = tuple(sorted(side))
        if best is None or value < best or (value == best and key < tuple(sorted(best_side))):
            best, best_side = value, side
    if best is None:
        raise DegenerateCutError("every cut leaves one side without terminal weight", stage="cut-oracle")
    return best, best_side


def sweep_sparsest(inst: SparsestCutInstance) -> Tuple[Optional[Fraction], FrozenSet[VertexId]]:
    """Best prefix cut of the Fiedler order; None when no prefix splits the terminal weight"""
    g = inst.graph
    order = fiedler_order(g)
    inside: set = set()
    crossing = 0
    weight_in = Fraction(0)
    total = inst.total_weight
    best: Optional[Fraction] = None
    best_side: FrozenSet[VertexId] = frozenset()
    for v in order[:-1]:
        for eid in g.incident(v):
            crossing += -1 if g.other_end(eid, v) in inside else 1
        inside.add(v)
        weight_in += inst.weights.get(v, Fraction(0))
        if weight_in == 0 or weight_in == total:
            continue
        value = Fraction(crossing) / min(weight_in, total - weight_in)
        if best is None or value < best:
            best, best_side = value, frozenset(inside)
    return best, best_side


def components_sparsest(inst: SparsestCutInstance) -> Tuple[Optional[Fraction], FrozenSet[VertexId]]:
    """A component carrying part of the terminal weight gives a zero-sparsity cut"""
    for comp in inst.graph.components():
        w = inst.weight(comp)
        if 0 < w < inst.total_weight:
            return Fraction(0), comp
    return None, frozenset()


def approx_sparsest(inst: SparsestCutInstance) -> Tuple[Optional[Fraction], FrozenSet[VertexId]]:
    """Exact below the brute-force limit, components plus spectral sweep above it"""
    if inst.graph.num_vertices <= min(BRUTE_FORCE_LIMIT, 14):
        try:
            return brute_force_sparsest(inst)
        except DegenerateCutError:
            return None, frozenset()
    value, side = components_sparsest(inst)
    if value is not None:
        return value, side
    return sweep_sparsest(inst)


__all__ = [
    "SparsestCutInstance",
    "sparsity",
    "product_sparsity",
    "brute_force_sparsest",
    "sweep_sparsest",
    "components_sparsest",
    "approx_sparsest",
]
