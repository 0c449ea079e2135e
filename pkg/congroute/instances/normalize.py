# instances/normalize.py - Degree-1 terminals and degree <= 4 via pendant vertices and grid gadgets
import logging
from typing import Dict, List, Optional, Tuple

from congroute.graph.models import EdgeId, MultiGraph, VertexId
from congroute.instances.models import MAX_DEGREE, Instance, Pair

logger = logging.getLogger(__name__)


class _Builder:
    """Mutable edge map with fresh ids for gadget vertices and edges"""

    def __init__(self, g: MultiGraph):
        self.vertices = set(g.vertices)
        self.edges: Dict[EdgeId, Tuple[VertexId, VertexId]] = dict(g.edges)
        self.vertex_origin: Dict[VertexId, VertexId] = {v: v for v in g.vertices}
        self.edge_origin: Dict[EdgeId, Optional[EdgeId]] = {eid: eid for eid in g.edge_ids}
        self.next_vertex = g.next_vertex
        self.next_edge = max(g.edge_ids, default=-1) + 1

    def vertex(self, origin: VertexId) -> VertexId:
        v = self.next_vertex
        self.next_vertex += 1
        self.vertices.add(v)
        self.vertex_origin[v] = origin
        return v

    def gadget_edge(self, u: VertexId, v: VertexId) -> EdgeId:
        eid = self.next_edge
        self.next_edge += 1
        self.edges[eid] = (u, v)
        self.edge_origin[eid] = None
        return eid

    def graph(self) -> MultiGraph:
        return MultiGraph(self.vertices, self.edges, next_vertex=self.next_vertex)


def _pendant_terminals(builder: _Builder, g: MultiGraph, pairs) -> List[Pair]:
    uses: Dict[VertexId, int] = {}
    for pair in pairs:
        for v in pair:
            uses[v] = uses.get(v, 0) + 1
    fresh_pairs = []
    for pair in pairs:
        endpoints = []
        for v in pair:
            if g.degree(v) == 1 and uses[v] == 1:
                endpoints.append(v)
                continue
            t = builder.vertex(v)
            builder.gadget_edge(t, v)
            endpoints.append(t)
        fresh_pairs.append(tuple(endpoints))
    return fresh_pairs


def _grid(builder: _Builder, v: VertexId) -> int:
    """Replace v by a d x d grid; the i-th incident edge (by id) attaches to the i-th first-row vertex"""
    incident = sorted(eid for eid, (a, b) in builder.edges.items() if v in (a, b))
    d = len(incident)
    cells = [[builder.vertex(builder.vertex_origin[v]) for _ in range(d)] for _ in range(d)]
    for r in range(d):
        for c in range(d):
            if c + 1 < d:
                builder.gadget_edge(cells[r][c], cells[r][c + 1])
            if r + 1 < d:
                builder.gadget_edge(cells[r][c], cells[r + 1][c])
    for i, eid in enumerate(incident):
        a, b = builder.edges[eid]
        builder.edges[eid] = (cells[0][i], b) if a == v else (a, cells[0][i])
    builder.vertices.discard(v)
    del builder.vertex_origin[v]
    return d


def normalize(raw: Instance) -> Instance:
    """Normalized copy of raw whose routes map back with no extra congestion.

    An instance that is already normalized is returned as is.
    """
    if raw.is_normalized:
        logger.debug("Instance already normalized")
        return raw
    g = raw.graph
    builder = _Builder(g)
    pairs = _pendant_terminals(builder, g, raw.pairs)

    degree: Dict[VertexId, int] = {v: 0 for v in builder.vertices}
    for a, b in builder.edges.values():
        degree[a] += 1
        degree[b] += 1
    heavy = sorted(v for v, d in degree.items() if d > MAX_DEGREE)
    for v in heavy:
        _grid(builder, v)

    normalized = Instance(
        graph=builder.graph(),
        pairs=tuple(pairs),
        vertex_origin=builder.vertex_origin,
        edge_origin=builder.edge_origin,
        original=raw,
    )
    logger.info(
        f"Normalized instance: n {g.num_vertices} -> {normalized.graph.num_vertices}, "
        f"m {g.num_edges} -> {normalized.graph.num_edges}, {len(heavy)} grid gadgets"
    )
    return normalized


__all__ = ["normalize"]
