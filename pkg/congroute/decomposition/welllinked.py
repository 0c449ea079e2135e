# decomposition/welllinked.py - Oracle-driven well-linked decomposition with charge-bound audit
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional

from congroute.cuts.oracle import CutOracle, ViolatingCut, is_violating
from congroute.errors import ContractViolationError, InvariantViolation, MalformedInputError, PreconditionError
from congroute.family.params import ParamTable, log2
from congroute.graph.models import MultiGraph, VertexId, VertexSubset

logger = logging.getLogger(__name__)


@dataclass
class Decomposition:
    """Partition of a host set into clusters the oracle could not split further"""

    host: VertexSubset
    clusters: List[VertexSubset]
    boundary: List[int]
    out_size: int
    gamma: int
    cuts: List[ViolatingCut] = field(default_factory=list)
    charge_history: List[int] = field(default_factory=list)
    bound_enforced: bool = True
    certified: bool = False

    @property
    def charge_bound(self) -> Fraction:
        """|out(S)|·(1 + 1/(64γ))"""
        return self.out_size * (1 + Fraction(1, 64 * max(self.gamma, 1)))

    @property
    def total_boundary(self) -> int:
        return sum(self.boundary)

    @property
    def bound_held(self) -> bool:
        return all(total <= self.charge_bound for total in self.charge_history)

    def cluster_of(self, v: VertexId) -> VertexSubset:
        for cluster in self.clusters:
            if v in cluster:
                return cluster
        raise MalformedInputError(f"vertex {v} is not in the decomposed set")


def _pick(g: MultiGraph, pending: List[VertexSubset]) -> VertexSubset:
    # largest boundary first, ties by smallest member
    return max(pending, key=lambda w: (len(g.out_edges(w)), -min(w)))


def decompose(
    g: MultiGraph,
    s: Iterable[VertexId],
    k: int,
    oracle: CutOracle,
    alpha: Fraction,
    gamma: int,
    enforce_bound: Optional[bool] = None,
) -> Decomposition:
    """Split S along verified (k, alpha)-violating cuts until the oracle finds none.

    The running total Σ|out(W)| is audited after every split. The charge
    bound is a hard check when alpha is no larger than the formula value
    alpha(k); with a looser alpha it is recorded only.
    """
    subset = g.check_vertices(s)
    if not subset:
        raise MalformedInputError("cannot decompose an empty vertex set")
    if enforce_bound is None:
        enforce_bound = Fraction(alpha) <= 1 / (Fraction(2**11) * max(gamma, 1) * log2(max(k, 2)))

    out_size = len(g.out_edges(subset))
    result = Decomposition(host=subset, clusters=[], boundary=[], out_size=out_size, gamma=gamma, bound_enforced=enforce_bound)
    pending: List[VertexSubset] = [subset]
    certified = True

    while pending:
        cluster = _pick(g, pending)
        pending.remove(cluster)
        cut = oracle(g, cluster, k, alpha)
        if cut is None:
            certified = certified and oracle.certifies(g, cluster)
            result.clusters.append(cluster)
            continue
        if not is_violating(g, cluster, cut, k, alpha):
            raise ContractViolationError(
                f"oracle returned a cut that is not ({k}, {alpha})-violating for a cluster of {len(cluster)} vertices",
                stage="welllinked",
            )
        result.cuts.append(cut)
        pending.extend((cut.x, cut.y))
        total = sum(len(g.out_edges(w)) for w in pending + result.clusters)
        result.charge_history.append(total)
        if total > result.charge_bound:
            message = f"Σ|out(W)|={total} exceeds the charge bound {float(result.charge_bound):.3f}"
            if enforce_bound:
                raise InvariantViolation(message, stage="welllinked")
            logger.debug(f"⚠️ {message} (alpha above alpha(k), recorded only)")

    result.clusters.sort(key=min)
    result.boundary = [len(g.out_edges(w)) for w in result.clusters]
    result.certified = certified
    if set().union(*result.clusters) != subset or sum(len(w) for w in result.clusters) != len(subset):
        raise InvariantViolation("decomposition clusters do not partition the host set", stage="welllinked")
    logger.debug(f"Decomposed |S|={len(subset)} into {len(result.clusters)} clusters after {len(result.cuts)} splits")
    return result


def decompose_bounded(
    g: MultiGraph,
    s: Iterable[VertexId],
    k: int,
    params: ParamTable,
    oracle: Optional[CutOracle] = None,
) -> Decomposition:
    """Decomposition of a set with |out(S)| <= k into clusters with |out(W)| <= k"""
    subset = g.check_vertices(s)
    boundary = len(g.out_edges(subset))
    if boundary > k:
        raise PreconditionError(f"|out(S)|={boundary} exceeds k={k}", stage="welllinked")
    oracle = oracle or CutOracle()
    enforce = params.alpha <= params.alpha_bound
    result = decompose(g, subset, k, oracle, params.alpha, params.gamma, enforce_bound=enforce)
    over = [b for b in result.boundary if b > k]
    if over:
        raise InvariantViolation(f"cluster boundaries {over} exceed k={k}", stage="welllinked")
    return result


__all__ = ["Decomposition", "decompose", "decompose_bounded"]
