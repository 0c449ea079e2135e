# routing/translate.py - Expander paths back to paths of G: embedding paths plus in-component connectors
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from congroute.errors import InvariantViolation, MalformedInputError
from congroute.expander.models import COMPONENT_LOAD_LIMIT, EMBEDDING_CONGESTION, EmbeddedExpander
from congroute.graph.models import MultiGraph, Path, PathSet, VertexId
from congroute.monitoring import StageMonitor
from congroute.schemas import CongestionHistogram

logger = logging.getLogger(__name__)

STAGE = "expander-route"
CONGESTION_LIMIT = EMBEDDING_CONGESTION + COMPONENT_LOAD_LIMIT

EMBEDDING_SEGMENT = "embedding"
CONNECTOR_SEGMENT = "connector"

Segment = Tuple[str, int]


@dataclass(frozen=True)
class RoutingResult:
    """G-paths for the routed pairs with the provenance of every segment.

    ``embedding_load`` counts edges on embedding paths of X edges,
    ``connector_load`` edges on connectors inside components.
    """

    pairs: Tuple[Tuple[VertexId, VertexId], ...] = ()
    paths: Tuple[Path, ...] = ()
    segments: Tuple[Tuple[Segment, ...], ...] = ()
    embedding_load: Counter = field(default_factory=Counter)
    connector_load: Counter = field(default_factory=Counter)

    def __len__(self) -> int:
        return len(self.paths)

    def path_set(self) -> PathSet:
        return PathSet.of(self.paths)

    def congestion(self) -> int:
        return self.path_set().congestion()

    def histogram(self) -> CongestionHistogram:
        return CongestionHistogram.from_load(self.path_set().load())


class _Connectors:
    """Shortest paths inside the tree component of each X vertex"""

    def __init__(self, g: MultiGraph, emb: EmbeddedExpander):
        self.g = g
        self.emb = emb
        self._graphs: Dict[int, MultiGraph] = {}

    def connect(self, i: int, a: VertexId, b: VertexId) -> Path:
        if a == b:
            return Path((a,), ())
        if i not in self._graphs:
            self._graphs[i] = self.g.edge_subgraph(self.emb.components[i])
        host = self._graphs[i]
        path = host.bfs_path(a, b) if a in host.vertices and b in host.vertices else None
        if path is None:
            raise InvariantViolation(f"component {i} does not connect {a} and {b}", stage=STAGE)
        return path


def _check_disjoint(x_paths: Sequence[Path]) -> None:
    seen: Set[int] = set()
    for path in x_paths:
        if len(set(path.vertices)) != len(path.vertices) or seen & set(path.vertices):
            raise MalformedInputError("expander paths must be simple and vertex-disjoint")
        seen.update(path.vertices)


def _translate_one(path: Path, emb: EmbeddedExpander, connectors: _Connectors) -> Tuple[Path, List[Segment], List[Path]]:
    x_edges = emb.edges
    here = path.vertices[0]
    walk = Path((emb.terminals[here],), ())
    segments: List[Segment] = []
    joins: List[Path] = []
    for eid, there in zip(path.edges, path.vertices[1:]):
        a, b = x_edges[eid]
        if {a, b} != {here, there}:
            raise MalformedInputError(f"X edge {eid} does not join {here} and {there}")
        embedded = emb.paths[eid] if a == here else emb.paths[eid].reversed()
        joins.append(connectors.connect(here, walk.target, embedded.source))
        walk = walk.concat(joins[-1])
        segments.append((CONNECTOR_SEGMENT, here))
        walk = walk.concat(embedded)
        segments.append((EMBEDDING_SEGMENT, eid))
        here = there
    joins.append(connectors.connect(here, walk.target, emb.terminals[here]))
    walk = walk.concat(joins[-1])
    segments.append((CONNECTOR_SEGMENT, here))
    return walk, segments, joins


def translate(
    g: MultiGraph,
    x_paths: Sequence[Path],
    emb: EmbeddedExpander,
    monitor: Optional[StageMonitor] = None,
) -> RoutingResult:
    """Replace every X edge by its embedding path and every X vertex by a connector in its component"""
    monitor = monitor or StageMonitor()
    if not x_paths:
        return RoutingResult()
    _check_disjoint(x_paths)
    connectors = _Connectors(g, emb)

    pairs, paths, segments = [], [], []
    embedding_load: Counter = Counter()
    connector_load: Counter = Counter()
    for x_path in x_paths:
        walk, provenance, joins = _translate_one(x_path, emb, connectors)
        for kind, index in provenance:
            if kind == EMBEDDING_SEGMENT:
                embedding_load.update(emb.paths[index].edges)
        for join in joins:
            connector_load.update(join.edges)
        final = walk.shortcut()
        final.validate(g)
        pairs.append((emb.terminals[x_path.vertices[0]], emb.terminals[x_path.vertices[-1]]))
        paths.append(final)
        segments.append(tuple(provenance))

    result = RoutingResult(tuple(pairs), tuple(paths), tuple(segments), embedding_load, connector_load)
    worst_embedding = max(embedding_load.values(), default=0)
    worst_connector = max(connector_load.values(), default=0)
    monitor.check(
        "embedding segments congestion at most 2",
        worst_embedding <= EMBEDDING_CONGESTION,
        f"max load {worst_embedding}",
        stage=STAGE,
    )
    monitor.check(
        "connector segments congestion at most 12",
        worst_connector <= COMPONENT_LOAD_LIMIT,
        f"max load {worst_connector}",
        stage=STAGE,
    )
    monitor.check(
        "translated paths congestion at most 14",
        result.congestion() <= CONGESTION_LIMIT,
        f"max load {result.congestion()}",
        stage=STAGE,
    )
    logger.debug(f"Translated {len(paths)} expander paths, congestion {result.congestion()}")
    return result


__all__ = ["RoutingResult", "translate", "CONGESTION_LIMIT", "EMBEDDING_SEGMENT", "CONNECTOR_SEGMENT"]
