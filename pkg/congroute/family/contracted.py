# family/contracted.py - Legal contracted graphs and their legality audit
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Mapping, Optional

import numpy as np

from congroute.errors import InvariantViolation
from congroute.flows.maxflow import FlowProblem, max_flow_value
from congroute.graph.models import MultiGraph, VertexId, VertexSubset

logger = logging.getLogger(__name__)

DEFAULT_CLUSTER_SPOTCHECKS = 10


@dataclass(frozen=True)
class LegalContractedGraph:
    """Contraction of G whose super-nodes are the legal clusters (V2); every other vertex is original (V1)"""

    graph: MultiGraph
    terminals: VertexSubset

    @classmethod
    def trivial(cls, g: MultiGraph, terminals) -> "LegalContractedGraph":
        return cls(g, frozenset(terminals))

    @property
    def base(self) -> MultiGraph:
        return self.graph.base

    @property
    def clusters(self) -> Mapping[VertexId, VertexSubset]:
        return self.graph.clusters

    @property
    def v1(self) -> VertexSubset:
        return frozenset(v for v in self.graph.vertices if not self.graph.is_super(v))

    @property
    def v2(self) -> VertexSubset:
        return frozenset(self.graph.clusters)

    def without_terminals(self) -> MultiGraph:
        """G′ ∖ 𝒯"""
        return self.graph.without_vertices(self.terminals)

    @property
    def num_edges(self) -> int:
        return self.graph.num_edges


@dataclass
class ClusterSpotCheck:
    cluster_min: VertexId
    half: int
    flow: int
    needed: Fraction

    @property
    def passed(self) -> bool:
        return self.flow >= self.needed


@dataclass
class LegalityReport:
    problems: List[str] = field(default_factory=list)
    outside_edges: int = 0
    edge_floor: Fraction = Fraction(0)
    spotchecks: List[ClusterSpotCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.problems

    @property
    def enough_edges(self) -> bool:
        return self.outside_edges >= self.edge_floor

    @property
    def spotchecks_passed(self) -> bool:
        return all(check.passed for check in self.spotchecks)


def cluster_spot_checks(
    g: MultiGraph,
    cluster: VertexSubset,
    alpha_wl: Fraction,
    rng: np.random.Generator,
    count: int = DEFAULT_CLUSTER_SPOTCHECKS,
) -> List[ClusterSpotCheck]:
    """Min-cut between random equal halves of out(C) inside G[C] ∪ out(C)"""
    boundary = sorted(g.out_edges(cluster))
    half = len(boundary) // 2
    if half == 0 or count <= 0:
        return []
    gadget, _stubs, _real = g.boundary_gadget(cluster)
    checks = []
    for _ in range(count):
        order = [int(e) for e in rng.permutation(boundary)]
        t1, t2 = frozenset(order[:half]), frozenset(order[half : 2 * half])
        flow = max_flow_value(FlowProblem(gadget, source_edges=t1, sink_edges=t2), cutoff=half)
        checks.append(ClusterSpotCheck(min(cluster), half, flow, Fraction(alpha_wl) * half))
    return checks


def check_legality(
    lcg: LegalContractedGraph,
    k: int,
    k1: int,
    alpha_wl: Fraction,
    rng: Optional[np.random.Generator] = None,
    spotchecks: int = DEFAULT_CLUSTER_SPOTCHECKS,
    strict: bool = True,
) -> LegalityReport:
    """Audit the checkable legality conditions exactly and spot-check cluster well-linkedness.

    Terminals outside V1, overlapping clusters, terminals inside a cluster
    and oversized cluster boundaries are hard problems; with ``strict`` the
    first batch of them is raised. The k/6 edge floor and the spot-checks
    are reported only.
    """
    g = lcg.graph
    base = lcg.base
    report = LegalityReport(edge_floor=Fraction(k, 6))
    missing = sorted(t for t in lcg.terminals if t not in g.vertices or g.is_super(t))
    if missing:
        report.problems.append(f"terminals {missing[:5]} are not original vertices")

    covered: set = set()
    for node, members in sorted(lcg.clusters.items()):
        if covered & members:
            report.problems.append(f"cluster {node} overlaps another cluster")
        covered |= members
        inside = members & lcg.terminals
        if inside:
            report.problems.append(f"cluster {node} contains terminals {sorted(inside)[:5]}")
        boundary = len(base.out_edges(members))
        if boundary > k1:
            report.problems.append(f"cluster {node} has |out|={boundary} > k1={k1}")
        if rng is not None:
            report.spotchecks.extend(cluster_spot_checks(base, members, alpha_wl, rng, spotchecks))

    report.outside_edges = lcg.without_terminals().num_edges
    if strict and report.problems:
        raise InvariantViolation("; ".join(report.problems[:3]), stage="good-family")
    logger.debug(
        f"Legality: {len(lcg.clusters)} clusters, {report.outside_edges} edges off terminals, "
        f"{sum(c.passed for c in report.spotchecks)}/{len(report.spotchecks)} spot-checks passed"
    )
    return report


__all__ = [
    "LegalContractedGraph",
    "LegalityReport",
    "ClusterSpotCheck",
    "check_legality",
    "cluster_spot_checks",
    "DEFAULT_CLUSTER_SPOTCHECKS",
]
