# instances/partition.py - LP value, flow-well-linked partition and pair selection
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from congroute.cuts.sparsity import SparsestCutInstance, approx_sparsest, product_sparsity
from congroute.decomposition.grouping import group_by_tree
from congroute.errors import InvariantViolation
from congroute.flows.concurrent import CONCURRENT_MODE, LP_MODE, ConcurrentFlowResult, approx_concurrent_flow
from congroute.flows.maxflow import route_matching
from congroute.graph.models import MultiGraph, VertexId, VertexSubset
from congroute.instances.models import Instance, Pair, SubInstance

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = Fraction(1, 2)
SELECTION_P = 2
SAME_GROUP_CHARGE = 12
CROSS_GROUP_CHARGE = 24


def lp_solution(inst: Instance, epsilon: float = 0.05) -> ConcurrentFlowResult:
    return approx_concurrent_flow(inst.graph, inst.pairs, epsilon=epsilon, mode=LP_MODE)


def lp_value(inst: Instance, epsilon: float = 0.05) -> Fraction:
    """Σx_i of the EDP relaxation, within (1 - epsilon)"""
    return lp_solution(inst, epsilon).value


def _pieces(g: MultiGraph, vertices: VertexSubset, pairs: Sequence[Pair]) -> List[Tuple[VertexSubset, List[Pair]]]:
    """Connected pieces of G[vertices] with the pairs lying entirely inside each"""
    result = []
    for comp in g.induced(vertices).components():
        inside = [(s, t) for s, t in pairs if s in comp and t in comp]
        if inside:
            result.append((comp, inside))
    return result


def _split(g: MultiGraph, pairs: Sequence[Pair], amounts: Dict[Pair, Fraction], threshold: Fraction):
    """Recursively cut along sparse cuts; pairs separated by a cut are dropped"""
    stack = _pieces(g, g.vertices, [pair for pair in pairs if amounts[pair] > 0])
    leaves = []
    dropped = 0
    while stack:
        vertices, inside = stack.pop()
        sub = g.induced(vertices)
        weights = {v: amounts[(s, t)] for s, t in inside for v in (s, t)}
        inst = SparsestCutInstance(sub, weights)
        value, side = approx_sparsest(inst)
        if value is not None and value < threshold:
            kept = [(s, t) for s, t in inside if (s in side) == (t in side)]
            dropped += len(inside) - len(kept)
            stack.extend(_pieces(g, side, kept))
            stack.extend(_pieces(g, vertices - side, kept))
            logger.debug(f"Split piece of {len(vertices)} vertices at sparsity {float(value):.4f}")
            continue
        phi = product_sparsity(inst, side) if value is not None else None
        leaves.append((sub, inside, weights, value, phi))
    leaves.sort(key=lambda leaf: min(leaf[0].vertices))
    return leaves, dropped


def spot_check(
    g: MultiGraph,
    terminals: Sequence[VertexId],
    rng: np.random.Generator,
    count: int,
    epsilon: float = 0.05,
    stage: str = "instance-prep",
) -> List[Tuple[Tuple[Pair, ...], str]]:
    """Route random perfect matchings on the terminals with congestion 2.

    A matching passes if it routes integrally, or if the concurrent flow
    reaches (1 - epsilon)/2. The first failing matching is raised.
    """
    records = []
    ordered = sorted(terminals)
    if len(ordered) < 2:
        return records
    for _ in range(count):
        perm = [int(v) for v in rng.permutation(ordered)]
        matching = tuple((perm[i], perm[i + 1]) for i in range(0, len(perm) - 1, 2))
        if route_matching(g, matching, budget=2).feasible:
            records.append((matching, "integral"))
            continue
        flow = approx_concurrent_flow(g, matching, epsilon=epsilon, mode=CONCURRENT_MODE)
        if flow.value >= Fraction(1 - epsilon).limit_denominator(10**6) / 2:
            records.append((matching, "fractional"))
            continue
        raise InvariantViolation(
            f"terminal set is not flow-well-linked: matching {list(matching)[:4]} has lambda={float(flow.value):.4f}",
            stage=stage,
            matching=matching,
        )
    return records


def select_pairs(
    sub: SubInstance,
    rng: Optional[np.random.Generator] = None,
    spotchecks: int = 20,
    epsilon: float = 0.05,
) -> SubInstance:
    """Keep one pair per touched group pair, charging every removed pair to it"""
    positive = [(s, t) for s, t in sub.candidates if sub.weights.get(s, 0) > 0]
    sub.pairs, sub.charge_ledger = (), []
    if not positive:
        return sub
    weights = {v: sub.weights.get(v, Fraction(0)) for v in sub.graph.vertices}
    grouping = group_by_tree(sub.graph, weights, SELECTION_P)

    remaining = list(positive)
    selected: List[Pair] = []
    while remaining:
        s, t = remaining[0]
        touched = {grouping.group_of(s), grouping.group_of(t)}
        members = frozenset().union(*(grouping.groups[i] for i in touched))
        removed = [(u, v) for u, v in remaining if u in members or v in members]
        charged = sum((weights[u] + weights[v] for u, v in removed), Fraction(0))
        same = len(touched) == 1
        limit = SAME_GROUP_CHARGE if same else CROSS_GROUP_CHARGE
        if charged > limit:
            raise InvariantViolation(f"pair ({s}, {t}) charged {charged} > {limit}", stage="instance-prep")
        sub.charge_ledger.append(((s, t), charged, same))
        selected.append((s, t))
        remaining = [pair for pair in remaining if pair not in removed]

    total = sum((charge for _pair, charge, _same in sub.charge_ledger), Fraction(0))
    if total != sub.candidate_weight or CROSS_GROUP_CHARGE * len(selected) < total:
        raise InvariantViolation(f"charge ledger total {total} fails the selection audit", stage="instance-prep")
    # a pair may sit inside one group, but no group serves two selected pairs
    owner: Dict[int, Pair] = {}
    for pair in selected:
        for gid in {grouping.group_of(v) for v in pair}:
            if owner.setdefault(gid, pair) != pair:
                raise InvariantViolation(f"group {gid} holds terminals of two selected pairs", stage="instance-prep")

    sub.pairs = tuple(selected)
    if rng is not None and spotchecks > 0:
        sub.spotchecks = spot_check(sub.graph, sorted(sub.terminals), rng, spotchecks, epsilon)
    logger.debug(f"Selected {len(selected)}/{len(sub.candidates)} pairs, charged weight {float(total):.4f}")
    return sub


def partition_flow_well_linked(
    inst: Instance,
    epsilon: float = 0.05,
    rng: Optional[np.random.Generator] = None,
    threshold: Fraction = DEFAULT_THRESHOLD,
    spotchecks: int = 20,
    solution: Optional[ConcurrentFlowResult] = None,
) -> List[SubInstance]:
    """Vertex-disjoint induced sub-instances, each with its selected pairs spot-checked.

    Terminal weights start at the LP values x_i; a leaf whose best cut has
    sparsity below 1 scales them by that sparsity.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    solution = solution or lp_solution(inst, epsilon)
    amounts = {pair: Fraction(min(x, 1)) for pair, x in zip(inst.pairs, solution.amounts)}
    leaves, dropped = _split(inst.graph, inst.pairs, amounts, Fraction(threshold))

    subs: List[SubInstance] = []
    for graph, inside, weights, value, phi in leaves:
        scale = min(Fraction(1), value) if value is not None else Fraction(1)
        pi = {v: w * scale for v, w in weights.items()}
        sub = SubInstance(graph=graph, candidates=tuple(inside), weights=pi, sparsity=value, product_sparsity=phi)
        subs.append(select_pairs(sub, rng, spotchecks, epsilon))
    selected = sum(len(sub.pairs) for sub in subs)
    logger.info(
        f"✅ Partition: {len(subs)} sub-instances, {selected} pairs selected "
        f"(LP value {float(solution.value):.3f}, {dropped} pairs dropped by cuts)"
    )
    return subs


__all__ = [
    "lp_value",
    "lp_solution",
    "partition_flow_well_linked",
    "select_pairs",
    "spot_check",
    "DEFAULT_THRESHOLD",
]
