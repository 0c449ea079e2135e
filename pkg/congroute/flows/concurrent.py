# flows/concurrent.py - Multiplicative-weights multicommodity flow (Garg-Koenemann / Fleischer)
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from congroute.errors import MalformedInputError
from congroute.graph.models import EdgeId, MultiGraph, Path, VertexId

logger = logging.getLogger(__name__)

LP_MODE = "lp"
CONCURRENT_MODE = "concurrent"


@dataclass(frozen=True)
class ConcurrentFlowResult:
    """Scaled, capacity-feasible fractional flow.

    ``value`` is the concurrent fraction λ in concurrent mode and Σx_i in
    LP mode; ``amounts[i]`` is the flow routed for pair i.
    """

    mode: str
    value: Fraction
    amounts: Tuple[Fraction, ...]
    flows: Tuple[Tuple[Tuple[Path, float], ...], ...]
    max_load: float
    epsilon: float


class _LengthGraph:
    """Index structures for repeated shortest-path queries under changing edge lengths"""

    def __init__(self, g: MultiGraph):
        self.graph = g
        self.vertex_ids = g.sorted_vertices()
        self.index = {v: i for i, v in enumerate(self.vertex_ids)}
        self.edge_ids = list(g.edge_ids)
        self.n = len(self.vertex_ids)
        if not self.edge_ids:
            self.group = np.zeros(0, dtype=np.int64)
            self.pu = self.pv = np.zeros(0, dtype=np.int64)
            self.members: List[np.ndarray] = []
            self.lookup: Dict[Tuple[int, int], int] = {}
            return
        eu = np.array([self.index[g.edges[e][0]] for e in self.edge_ids])
        ev = np.array([self.index[g.edges[e][1]] for e in self.edge_ids])
        pairs = np.stack([np.minimum(eu, ev), np.maximum(eu, ev)], axis=1)
        unique, inverse = np.unique(pairs, axis=0, return_inverse=True)
        self.group = np.asarray(inverse).reshape(-1)
        self.pu, self.pv = unique[:, 0], unique[:, 1]
        self.members = [np.flatnonzero(self.group == gid) for gid in range(len(unique))]
        self.lookup = {(int(a), int(b)): gid for gid, (a, b) in enumerate(unique)}

    def _matrix(self, lengths: np.ndarray) -> csr_matrix:
        pair_len = np.full(len(self.pu), np.inf)
        np.minimum.at(pair_len, self.group, lengths)
        return csr_matrix((pair_len, (self.pu, self.pv)), shape=(self.n, self.n))

    def distances(self, lengths: np.ndarray, sources: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        dist, pred = dijkstra(self._matrix(lengths), directed=False, indices=list(sources), return_predecessors=True)
        return np.atleast_2d(dist), np.atleast_2d(pred)

    def path(self, pred_row: np.ndarray, source: int, target: int, lengths: np.ndarray) -> Tuple[List[int], List[int]]:
        """Vertex indices and edge positions of the tree path source -> target"""
        vertices = [target]
        node = target
        while node != source:
            node = int(pred_row[node])
            vertices.append(node)
        vertices.reverse()
        positions = []
        for a, b in zip(vertices, vertices[1:]):
            gid = self.lookup[(min(a, b), max(a, b))]
            members = self.members[gid]
            positions.append(int(members[np.argmin(lengths[members])]))
        return vertices, positions

    def to_path(self, vertices: Sequence[int], positions: Sequence[int]) -> Path:
        return Path(tuple(self.vertex_ids[v] for v in vertices), tuple(self.edge_ids[p] for p in positions))


def _prepare(g: MultiGraph, pairs: Sequence[Tuple[VertexId, VertexId]], epsilon: float) -> _LengthGraph:
    if not 0 < epsilon < 1:
        raise MalformedInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    for s, t in pairs:
        g.check_vertices((s, t))
        if s == t:
            raise MalformedInputError(f"demand pair with identical endpoints {s}")
    return _LengthGraph(g)


def _collect(lg: _LengthGraph, routed: List[Counter], scale: float):
    flows = []
    for counter in routed:
        flows.append(tuple((lg.to_path(v, p), amount / scale) for (v, p), amount in counter.items()))
    return tuple(flows)


def _max_lp_flow(lg: _LengthGraph, pairs, eps: float) -> Tuple[np.ndarray, np.ndarray, List[Counter]]:
    m, k = len(lg.edge_ids), len(pairs)
    total = m + k
    delta = (1 + eps) / ((1 + eps) * total) ** (1 / eps)
    lengths = np.full(m, delta)
    virtual = np.full(k, delta)
    edge_flow = np.zeros(m)
    pair_flow = np.zeros(k)
    routed = [Counter() for _ in pairs]
    src = [lg.index[s] for s, _ in pairs]
    dst = [lg.index[t] for _, t in pairs]
    growth = math.log1p(eps)

    while True:
        dist, _pred = lg.distances(lengths, src)
        best = min(
            (dist[i][dst[i]] + virtual[i] for i in range(k) if np.isfinite(dist[i][dst[i]])),
            default=math.inf,
        )
        if best >= 1:
            break
        threshold = min(1.0, best * (1 + eps))
        for i in range(k):
            while True:
                d_row, p_row = lg.distances(lengths, [src[i]])
                if not np.isfinite(d_row[0][dst[i]]):
                    break
                length = d_row[0][dst[i]] + virtual[i]
                if length >= threshold:
                    break
                vertices, positions = lg.path(p_row[0], src[i], dst[i], lengths)
                units = int(math.floor(math.log(threshold / length) / growth)) + 1
                factor = (1 + eps) ** units
                lengths[positions] *= factor
                virtual[i] *= factor
                edge_flow[positions] += units
                pair_flow[i] += units
                routed[i][(tuple(vertices), tuple(positions))] += units
    return edge_flow, pair_flow, routed


def _max_concurrent_flow(lg: _LengthGraph, pairs, demands, eps: float) -> Tuple[np.ndarray, np.ndarray, List[Counter]]:
    m = len(lg.edge_ids)
    delta = (m / (1 - eps)) ** (-1 / eps)
    lengths = np.full(m, delta)
    edge_flow = np.zeros(m)
    pair_flow = np.zeros(len(pairs))
    routed = [Counter() for _ in pairs]
    src = [lg.index[s] for s, _ in pairs]
    dst = [lg.index[t] for _, t in pairs]

    dist, _pred = lg.distances(lengths, src)
    if any(not np.isfinite(dist[i][dst[i]]) for i in range(len(pairs))):
        return edge_flow, pair_flow, routed

    while lengths.sum() < 1:
        for i, demand in enumerate(demands):
            remaining = float(demand)
            while remaining > 0 and lengths.sum() < 1:
                _d, p_row = lg.distances(lengths, [src[i]])
                vertices, positions = lg.path(p_row[0], src[i], dst[i], lengths)
                amount = min(remaining, 1.0)
                lengths[positions] *= 1 + eps * amount
                edge_flow[positions] += amount
                pair_flow[i] += amount
                routed[i][(tuple(vertices), tuple(positions))] += amount
                remaining -= amount
    return edge_flow, pair_flow, routed


def approx_concurrent_flow(
    g: MultiGraph,
    pairs: Sequence[Tuple[VertexId, VertexId]],
    epsilon: float = 0.05,
    mode: str = LP_MODE,
    demands: Optional[Sequence[float]] = None,
) -> ConcurrentFlowResult:
    """Fractional multicommodity flow on unit capacities.

    In LP mode this maximizes Σx_i subject to x_i <= 1 (the EDP relaxation);
    in concurrent mode it maximizes λ such that λ·d_i is routed for every
    pair. The raw multiplicative-weights flow is scaled by its own maximum
    load, so the returned flow is always capacity-feasible.
    """
    lg = _prepare(g, pairs, epsilon)
    inner = epsilon / 3
    if not pairs or not lg.edge_ids:
        zeros = tuple(Fraction(0) for _ in pairs)
        return ConcurrentFlowResult(mode, Fraction(0), zeros, tuple(() for _ in pairs), 0.0, epsilon)

    if mode == LP_MODE:
        edge_flow, pair_flow, routed = _max_lp_flow(lg, pairs, inner)
        scale = max(float(edge_flow.max(initial=0)), float(pair_flow.max(initial=0)), 1e-12)
        amounts = tuple(Fraction(float(f) / scale).limit_denominator(10**9) for f in pair_flow)
        value = sum(amounts, Fraction(0))
    elif mode == CONCURRENT_MODE:
        demand_list = list(demands) if demands is not None else [1.0] * len(pairs)
        edge_flow, pair_flow, routed = _max_concurrent_flow(lg, pairs, demand_list, inner)
        scale = max(float(edge_flow.max(initial=0)), 1e-12)
        amounts = tuple(Fraction(float(f) / scale).limit_denominator(10**9) for f in pair_flow)
        ratios = [a / Fraction(d).limit_denominator(10**9) for a, d in zip(amounts, demand_list) if d > 0]
        value = min(ratios, default=Fraction(0))
    else:
        raise MalformedInputError(f"unknown flow mode '{mode}'")

    logger.debug(f"MWU {mode} flow on {len(pairs)} pairs: value={float(value):.4f} (eps={epsilon})")
    return ConcurrentFlowResult(
        mode=mode,
        value=value,
        amounts=amounts,
        flows=_collect(lg, routed, scale),
        max_load=float(edge_flow.max(initial=0)) / scale,
        epsilon=epsilon,
    )


__all__ = ["ConcurrentFlowResult", "approx_concurrent_flow", "LP_MODE", "CONCURRENT_MODE"]
