# routing/fallback.py - Single shortest-path route for instances too small for the construction
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from congroute.graph.models import MultiGraph, Path, VertexId

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FallbackRoute:
    index: int
    pair: Tuple[VertexId, VertexId]
    path: Path
    reason: str


def single_pair_route(
    g: MultiGraph, pairs: Sequence[Tuple[VertexId, VertexId]], reason: str
) -> Optional[FallbackRoute]:
    """Route the first connected pair along a shortest path; None when no pair is connected"""
    for index, (s, t) in enumerate(pairs):
        path = g.bfs_path(s, t)
        if path is not None:
            logger.warning(f"⚠️ Fallback: routing pair ({s}, {t}) alone ({reason})")
            return FallbackRoute(index, (s, t), path, reason)
    logger.warning(f"⚠️ Fallback found no connected pair among {len(pairs)} ({reason})")
    return None


__all__ = ["FallbackRoute", "single_pair_route"]
