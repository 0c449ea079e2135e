# routing/verify.py - Independent re-check of a routing against its instance
from __future__ import annotations

import logging
from collections import Counter
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

from congroute.errors import MalformedInputError, VerificationFailure
from congroute.graph.models import Path, PathSet, VertexId
from congroute.schemas import CongestionHistogram, VerificationReport, rounded

if TYPE_CHECKING:
    from congroute.instances.models import Instance

logger = logging.getLogger(__name__)

DEFAULT_LIMIT = 14

Pair = Tuple[VertexId, VertexId]


def _key(pair: Pair) -> Tuple[VertexId, VertexId]:
    s, t = pair
    return (s, t) if s <= t else (t, s)


def verify_routing(
    inst: "Instance",
    routed: Sequence[Tuple[Pair, Path]],
    limit: int = DEFAULT_LIMIT,
    lp_value: Optional[float] = None,
) -> VerificationReport:
    """Every path valid in G and joining a demanded pair, no pair routed twice, congestion at most ``limit``.

    Only the graph and the demand list of ``inst`` are read. Raises
    VerificationFailure on the first violation.
    """
    demanded = Counter(_key(pair) for pair in inst.pairs)
    used: Counter = Counter()
    for index, (pair, path) in enumerate(routed):
        try:
            path.validate(inst.graph)
        except MalformedInputError as e:
            raise VerificationFailure(f"path {index} is not a path of G: {e.message}") from e
        if {path.source, path.target} != set(pair):
            raise VerificationFailure(f"path {index} runs {path.source}->{path.target}, not {pair}")
        key = _key(pair)
        used[key] += 1
        if used[key] > demanded[key]:
            reason = "is not demanded" if not demanded[key] else "is routed twice"
            raise VerificationFailure(f"pair {pair} {reason}")

    load = PathSet.of(path for _pair, path in routed).load()
    histogram = CongestionHistogram.from_load(load)
    if histogram.max_load > limit:
        edge = min(e for e, count in load.items() if count == histogram.max_load)
        raise VerificationFailure(
            f"edge {edge} carries {histogram.max_load} paths, above congestion {limit}", edge_id=edge
        )

    fraction = len(routed) / lp_value if lp_value else None
    logger.info(f"✅ Verification: {len(routed)} pairs, max load {histogram.max_load} <= {limit}")
    return VerificationReport(
        passed=True,
        routed=len(routed),
        limit=limit,
        max_load=histogram.max_load,
        histogram=histogram,
        lp_value=rounded(lp_value),
        routed_fraction=rounded(fraction),
        message="ok",
    )


__all__ = ["verify_routing", "DEFAULT_LIMIT"]
