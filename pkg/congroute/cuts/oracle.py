# cuts/oracle.py - (k, alpha)-violating cut oracle (exact enumeration or spectral sweep)
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from congroute.cuts.spectral import fiedler_order
from congroute.errors import InvariantViolation, MalformedInputError, OracleTooLargeError, PreconditionError
from congroute.flows.maxflow import FlowProblem, min_cut
from congroute.graph.models import EdgeId, EdgeSubset, MultiGraph, VertexId, VertexSubset

logger = logging.getLogger(__name__)

EXACT = "exact"
SPECTRAL = "spectral"
AUTO = "auto"
ORACLE_MODES = (EXACT, SPECTRAL, AUTO)

DEFAULT_SIZE_BOUND = 22
VERTEX_ENUMERATION_LIMIT = 20
ENDPOINT_ENUMERATION_LIMIT = 12
CHUNK = 1 << 15


@dataclass(frozen=True)
class ViolatingCut:
    """Bipartition (X, Y) of S with witnesses T1 ⊆ out(X)∩out(S), T2 ⊆ out(Y)∩out(S)"""

    x: VertexSubset
    y: VertexSubset
    t1: EdgeSubset
    t2: EdgeSubset
    crossing: EdgeSubset

    @property
    def size(self) -> int:
        return len(self.crossing)

    @property
    def witness(self) -> int:
        return min(len(self.t1), len(self.t2))


def _terminal_edges(g: MultiGraph, s: VertexSubset, terminals: Optional[Iterable[EdgeId]]) -> EdgeSubset:
    boundary = g.out_edges(s)
    if terminals is None:
        return boundary
    chosen = g.check_edges(terminals)
    if not chosen <= boundary:
        raise MalformedInputError(f"terminal edges {sorted(chosen - boundary)[:5]} are not in out(S)")
    return chosen


def is_violating(
    g: MultiGraph,
    s: Iterable[VertexId],
    cut: ViolatingCut,
    k: int,
    alpha: Fraction,
    terminals: Optional[Iterable[EdgeId]] = None,
) -> bool:
    """Re-check a cut by independent counting"""
    subset = g.check_vertices(s)
    terms = _terminal_edges(g, subset, terminals)
    x, y = frozenset(cut.x), frozenset(cut.y)
    if not x or not y or x & y or (x | y) != subset:
        return False
    if not (cut.t1 <= terms and cut.t2 <= terms) or cut.t1 & cut.t2:
        return False
    if any(g.inner_endpoint(e, subset) not in x for e in cut.t1):
        return False
    if any(g.inner_endpoint(e, subset) not in y for e in cut.t2):
        return False
    if len(cut.t1) + len(cut.t2) > k:
        return False
    witness = min(len(cut.t1), len(cut.t2))
    crossing = len(g.edges_between(x, y))
    return witness >= 1 and crossing < Fraction(alpha) * witness


def _build_cut(g: MultiGraph, s: VertexSubset, x: FrozenSet[VertexId], k: int, by_side: Dict[VertexId, List[EdgeId]]) -> ViolatingCut:
    """Canonical witness: the first m terminal edges (by id) on each side, m = min(|T_X|, |T_Y|, k/2)"""
    y = s - x
    tx = sorted(e for v in x for e in by_side.get(v, ()))
    ty = sorted(e for v in y for e in by_side.get(v, ()))
    m = min(len(tx), len(ty), k // 2)
    return ViolatingCut(x=x, y=y, t1=frozenset(tx[:m]), t2=frozenset(ty[:m]), crossing=g.edges_between(x, y))


def _canonical(s: VertexSubset, side: Iterable[VertexId]) -> FrozenSet[VertexId]:
    side = frozenset(side)
    return side if min(s) in side else s - side


class _Best:
    """Tracks the minimum crossing/m ratio; ties go to the lexicographically smallest X"""

    def __init__(self):
        self.ratio: Optional[Fraction] = None
        self.side: Optional[FrozenSet[VertexId]] = None

    def offer(self, crossing: int, m: int, side: FrozenSet[VertexId]) -> None:
        ratio = Fraction(crossing, m)
        if self.ratio is None or ratio < self.ratio:
            self.ratio, self.side = ratio, side
        elif ratio == self.ratio and tuple(sorted(side)) < tuple(sorted(self.side)):
            self.side = side


def _exact_by_vertices(g, s, terms, k, alpha, by_side, best: _Best) -> None:
    order = sorted(s)
    n = len(order)
    index = {v: i for i, v in enumerate(order)}
    inner = sorted(g.inner_edges(s))
    a = np.array([index[g.edges[e][0]] for e in inner], dtype=np.int64)
    b = np.array([index[g.edges[e][1]] for e in inner], dtype=np.int64)
    tcount = np.zeros(n, dtype=np.int64)
    for v, edges in by_side.items():
        tcount[index[v]] = len(edges)
    total = int(tcount.sum())
    half = k // 2
    full = (1 << n) - 1
    shifts = np.arange(n, dtype=np.int64)
    alpha = Fraction(alpha)

    # bit 0 (the smallest vertex) is always on the X side
    for start in range(0, 1 << (n - 1), CHUNK):
        stop = min(start + CHUNK, 1 << (n - 1))
        masks = (np.arange(start, stop, dtype=np.int64) << 1) | 1
        bits = (masks[:, None] >> shifts) & 1
        crossing = (bits[:, a] != bits[:, b]).sum(axis=1) if len(inner) else np.zeros(len(masks), dtype=np.int64)
        tx = bits @ tcount
        m = np.minimum(np.minimum(tx, total - tx), half)
        ok = (masks != full) & (m >= 1) & (crossing <= float(alpha) * m)
        for pos in np.flatnonzero(ok):
            if not int(crossing[pos]) < alpha * int(m[pos]):
                continue
            side = frozenset(order[i] for i in range(n) if bits[pos, i])
            best.offer(int(crossing[pos]), int(m[pos]), side)


def _exact_by_endpoints(g, s, terms, k, alpha, by_side, best: _Best) -> None:
    """Every terminal-endpoint assignment, completed by a min cut inside G[S]"""
    inner_graph = g.induced(s)
    endpoints = sorted(by_side)
    count = {v: len(by_side[v]) for v in endpoints}
    total = sum(count.values())
    anchor, rest = endpoints[0], endpoints[1:]
    for size in range(len(rest) + 1):
        for extra in combinations(rest, size):
            sources = frozenset((anchor,) + extra)
            sinks = frozenset(endpoints) - sources
            if not sinks:
                continue
            tx = sum(count[v] for v in sources)
            m = min(tx, total - tx, k // 2)
            if m < 1:
                continue
            problem = FlowProblem(inner_graph, source_vertices=sources, sink_vertices=sinks)
            crossing, side, _sink_side = min_cut(problem)
            if crossing < Fraction(alpha) * m:
                best.offer(crossing, m, _canonical(s, side))


def _spectral(g, s, terms, k, alpha, by_side, best: _Best) -> None:
    """Sweep the Fiedler order of G[S], plus component and singleton candidates"""
    inner_graph = g.induced(s)
    total = sum(len(edges) for edges in by_side.values())
    candidates: List[FrozenSet[VertexId]] = []
    inside: set = set()
    for v in fiedler_order(inner_graph)[:-1]:
        inside.add(v)
        candidates.append(frozenset(inside))
    candidates.extend(inner_graph.components())
    candidates.extend(frozenset((v,)) for v in sorted(by_side))
    for side in candidates:
        if not side or side == s:
            continue
        tx = sum(len(by_side.get(v, ())) for v in side)
        m = min(tx, total - tx, k // 2)
        if m < 1:
            continue
        crossing = len(inner_graph.out_edges(side))
        if crossing < Fraction(alpha) * m:
            best.offer(crossing, m, _canonical(s, side))


def _resolve_mode(mode: str, s: VertexSubset, by_side, terms, size_bound: int) -> str:
    if mode not in ORACLE_MODES:
        raise MalformedInputError(f"unknown cut-oracle mode '{mode}'")
    if mode == AUTO:
        small = len(s) <= VERTEX_ENUMERATION_LIMIT or len(by_side) <= ENDPOINT_ENUMERATION_LIMIT
        return EXACT if len(terms) <= size_bound and small else SPECTRAL
    if mode == EXACT and len(terms) > size_bound:
        raise OracleTooLargeError(
            f"exact oracle refused: {len(terms)} boundary edges exceed the bound {size_bound}",
            stage="cut-oracle",
        )
    return mode


def find_violating_cut(
    g: MultiGraph,
    s: Iterable[VertexId],
    k: int,
    alpha: Fraction,
    mode: str = AUTO,
    terminals: Optional[Iterable[EdgeId]] = None,
    size_bound: int = DEFAULT_SIZE_BOUND,
) -> Optional[ViolatingCut]:
    """Return a (k, alpha)-violating cut of S, or None.

    None from the exact mode certifies that S is (k, alpha)-well-linked with
    respect to the terminal edges; None from the spectral mode is only a
    heuristic miss. Every returned cut is re-checked before it leaves.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha}", stage="cut-oracle")
    if k < 1:
        raise PreconditionError(f"k must be positive, got {k}", stage="cut-oracle")
    subset = g.check_vertices(s)
    terms = _terminal_edges(g, subset, terminals)
    by_side: Dict[VertexId, List[EdgeId]] = {}
    for eid in sorted(terms):
        by_side.setdefault(g.inner_endpoint(eid, subset), []).append(eid)
    resolved = _resolve_mode(mode, subset, by_side, terms, size_bound)
    if len(subset) < 2 or len(terms) < 2 or k < 2 or len(by_side) < 2:
        return None

    best = _Best()
    if resolved == EXACT and len(subset) <= VERTEX_ENUMERATION_LIMIT:
        _exact_by_vertices(g, subset, terms, k, alpha, by_side, best)
    elif resolved == EXACT:
        _exact_by_endpoints(g, subset, terms, k, alpha, by_side, best)
    else:
        _spectral(g, subset, terms, k, alpha, by_side, best)

    if best.side is None:
        logger.debug(f"No ({k}, {alpha})-violating cut in |S|={len(subset)} ({resolved})")
        return None
    cut = _build_cut(g, subset, best.side, k, by_side)
    if not is_violating(g, subset, cut, k, alpha, terms):
        raise InvariantViolation("oracle produced a cut that fails its own re-check", stage="cut-oracle")
    logger.debug(f"Violating cut |X|={len(cut.x)} |Y|={len(cut.y)} crossing={cut.size} witness={cut.witness}")
    return cut


class CutOracle:
    """Configured oracle handed to the decomposition and search stages"""

    def __init__(self, mode: str = AUTO, size_bound: int = DEFAULT_SIZE_BOUND):
        if mode not in ORACLE_MODES:
            raise MalformedInputError(f"unknown cut-oracle mode '{mode}'")
        self.mode = mode
        self.size_bound = size_bound
        self.calls = 0
        self.exact_calls = 0

    def certifies(self, g: MultiGraph, s: Iterable[VertexId], terminals: Optional[Iterable[EdgeId]] = None) -> bool:
        """Whether a None answer on (S, terminals) would be a certificate"""
        if self.mode == SPECTRAL:
            return False
        subset = g.check_vertices(s)
        terms = _terminal_edges(g, subset, terminals)
        if self.mode == EXACT:
            return len(terms) <= self.size_bound
        endpoints = {g.inner_endpoint(e, subset) for e in terms}
        return _resolve_mode(AUTO, subset, endpoints, terms, self.size_bound) == EXACT

    def __call__(
        self,
        g: MultiGraph,
        s: Iterable[VertexId],
        k: int,
        alpha: Fraction,
        terminals: Optional[Iterable[EdgeId]] = None,
    ) -> Optional[ViolatingCut]:
        self.calls += 1
        if self.certifies(g, s, terminals):
            self.exact_calls += 1
        return find_violating_cut(g, s, k, alpha, self.mode, terminals, self.size_bound)


__all__ = [
    "ViolatingCut",
    "CutOracle",
    "find_violating_cut",
    "is_violating",
    "EXACT",
    "SPECTRAL",
    "AUTO",
    "ORACLE_MODES",
    "DEFAULT_SIZE_BOUND",
]
