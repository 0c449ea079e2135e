# expander/krv.py - Cut-matching game: random-projection cut player, matching players and the embedded expander
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from congroute.cuts.spectral import fiedler_order
from congroute.errors import MalformedInputError
from congroute.expander.interfaces import connect_terminals, route_within
from congroute.expander.models import (
    COMPONENT_LOAD_LIMIT,
    EMBEDDING_CONGESTION,
    STAGE,
    EmbeddedExpander,
    InterfaceGrouping,
    TreeFamily,
)
from congroute.family.params import ParamTable, log2
from congroute.graph.models import MultiGraph, PathSet, VertexId
from congroute.monitoring import StageMonitor
from congroute.schemas import KrvGameReport, rounded

logger = logging.getLogger(__name__)

EXACT_EXPANSION_LIMIT = 20
EXPANDER_THRESHOLD = 0.5
RANDOM_PLAYER = "random"
ADVERSARIAL_PLAYER = "adversarial"
PLAYERS = (RANDOM_PLAYER, ADVERSARIAL_PLAYER)
DEFAULT_GAMES = 200

Matching = Tuple[Tuple[int, int], ...]


def krv_rounds(n: int, c_gamma: float = 1) -> int:
    """⌈c_γ · log₂²n⌉ rounds"""
    lg = log2(max(n, 2))
    return max(1, math.ceil(c_gamma * lg * lg))


class CutPlayer:
    """Random-projection cut player.

    Keeps the random-walk matrix of the matchings played so far; each
    bisection projects it on a fresh random direction and splits at the
    median, ties broken by vertex id.
    """

    def __init__(self, n: int, rng: np.random.Generator):
        if n < 2 or n % 2:
            raise MalformedInputError(f"cut-matching game needs an even number of vertices, got {n}")
        self.n = n
        self.rng = rng
        self.walk = np.eye(n)

    def bisect(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        direction = self.rng.standard_normal(self.n)
        direction -= direction.mean()
        projection = np.round(self.walk @ direction, 12)
        order = np.lexsort((np.arange(self.n), projection))
        half = self.n // 2
        return tuple(sorted(int(i) for i in order[:half])), tuple(sorted(int(i) for i in order[half:]))

    def absorb(self, matching: Sequence[Tuple[int, int]]) -> None:
        walk = self.walk.copy()
        for a, b in matching:
            mixed = (self.walk[a] + self.walk[b]) / 2
            walk[a] = mixed
            walk[b] = mixed
        self.walk = walk


class CutTable:
    """Crossing counts of every vertex subset, updated edge by edge (n <= 20)"""

    def __init__(self, n: int):
        if n > EXACT_EXPANSION_LIMIT:
            raise MalformedInputError(f"exact cut enumeration is limited to {EXACT_EXPANSION_LIMIT} vertices")
        self.n = n
        self.masks = np.arange(1, (1 << n) - 1, dtype=np.int64)
        self.sizes = np.zeros(len(self.masks), dtype=np.int64)
        for v in range(n):
            self.sizes += (self.masks >> v) & 1
        self.crossing = np.zeros(len(self.masks), dtype=np.int64)
        self.small = self.sizes <= n // 2

    def add(self, edges: Sequence[Tuple[int, int]]) -> None:
        for a, b in edges:
            self.crossing += ((self.masks >> a) & 1) != ((self.masks >> b) & 1)

    def expansion(self) -> float:
        """min |E(S, S̄)| / |S| over |S| <= n/2"""
        return float(np.min(self.crossing[self.small] / self.sizes[self.small]))

    def sparsest(self) -> FrozenSet[int]:
        ratio = self.crossing / np.minimum(self.sizes, self.n - self.sizes)
        mask = int(self.masks[int(np.argmin(ratio))])
        return frozenset(v for v in range(self.n) if mask >> v & 1)


def _spectral_expansion(n: int, edges: Sequence[Tuple[int, int]]) -> float:
    """λ₂(L)/2, a lower bound on edge expansion"""
    laplacian = np.zeros((n, n))
    for a, b in edges:
        laplacian[a, a] += 1
        laplacian[b, b] += 1
        laplacian[a, b] -= 1
        laplacian[b, a] -= 1
    values = np.linalg.eigvalsh(laplacian)
    return float(values[1]) / 2


def edge_expansion(n: int, edges: Sequence[Tuple[int, int]]) -> Tuple[float, bool]:
    """Expansion of the multigraph on 0..n-1; exact by enumeration up to 20 vertices, else spectral"""
    if n < 2:
        return math.inf, True
    if n <= EXACT_EXPANSION_LIMIT:
        table = CutTable(n)
        table.add(edges)
        return table.expansion(), True
    return _spectral_expansion(n, edges), False


def _sweep_side(n: int, edges: Sequence[Tuple[int, int]]) -> FrozenSet[int]:
    order = fiedler_order(MultiGraph(range(n), dict(enumerate(edges))))
    best, side = None, frozenset()
    for cut in range(1, n // 2 + 1):
        prefix = frozenset(order[:cut])
        ratio = Fraction(sum(1 for a, b in edges if (a in prefix) != (b in prefix)), cut)
        if best is None or ratio < best:
            best, side = ratio, prefix
    return side


def random_matching(a: Sequence[int], b: Sequence[int], rng: np.random.Generator) -> Matching:
    shuffled = [int(x) for x in rng.permutation(list(b))]
    return tuple(sorted(zip(a, shuffled)))


def adversarial_matching(a: Sequence[int], b: Sequence[int], side: FrozenSet[int]) -> Matching:
    """Pair A with B on the same side of ``side`` as far as possible; only the rest cross it"""
    pairs: List[Tuple[int, int]] = []
    left_a, left_b = [], []
    for inside in (True, False):
        xs = [x for x in a if (x in side) == inside]
        ys = [y for y in b if (y in side) == inside]
        common = min(len(xs), len(ys))
        pairs += list(zip(xs[:common], ys[:common]))
        left_a += xs[common:]
        left_b += ys[common:]
    pairs += list(zip(left_a, left_b))
    return tuple(sorted(pairs))


def play_game(
    n: int,
    rounds: int,
    player: str,
    rng: np.random.Generator,
) -> Tuple[List[Matching], float, bool]:
    """One cut-matching game against a simulated matching player; returns matchings and expansion"""
    if player not in PLAYERS:
        raise MalformedInputError(f"unknown matching player '{player}'")
    cut_player = CutPlayer(n, rng)
    table = CutTable(n) if n <= EXACT_EXPANSION_LIMIT else None
    matchings: List[Matching] = []
    edges: List[Tuple[int, int]] = []
    for _ in range(rounds):
        a, b = cut_player.bisect()
        if player == RANDOM_PLAYER:
            matching = random_matching(a, b, rng)
        else:
            if not edges:
                side = frozenset()
            elif table is not None:
                side = table.sparsest()
            else:
                side = _sweep_side(n, edges)
            matching = adversarial_matching(a, b, side)
        cut_player.absorb(matching)
        matchings.append(matching)
        edges += matching
        if table is not None:
            table.add(matching)
    if table is not None:
        return matchings, table.expansion(), True
    value, exact = edge_expansion(n, edges)
    return matchings, value, exact


def krv_harness(
    n: int,
    player: str = RANDOM_PLAYER,
    games: int = DEFAULT_GAMES,
    seed: int = 0,
    rounds: Optional[int] = None,
    c_gamma: float = 1,
) -> KrvGameReport:
    """Play seeded games and count how often X comes out a ½-expander"""
    rounds = rounds if rounds is not None else krv_rounds(n, c_gamma)
    rng = np.random.default_rng(seed)
    expanders, worst, exact_all = 0, math.inf, True
    for _ in range(games):
        _matchings, value, exact = play_game(n, rounds, player, rng)
        expanders += value >= EXPANDER_THRESHOLD
        worst = min(worst, value)
        exact_all = exact_all and exact
    logger.info(f"✅ KRV harness n={n} player={player}: {expanders}/{games} expanders after {rounds} rounds")
    return KrvGameReport(
        n=n,
        player=player,
        games=games,
        rounds=rounds,
        expanders=expanders,
        success_rate=rounded(expanders / games) if games else 0.0,
        min_expansion=rounded(worst) if games else 0.0,
        exact=exact_all,
        seed=seed,
    )


def krv_build(
    g: MultiGraph,
    grouping: InterfaceGrouping,
    trees: TreeFamily,
    terminals: Sequence[VertexId],
    params: ParamTable,
    rng: np.random.Generator,
    monitor: Optional[StageMonitor] = None,
) -> EmbeddedExpander:
    """Embed a cut-matching expander on k′ terminals: matching j is routed inside S_j"""
    monitor = monitor or StageMonitor()
    k_prime = params.k_prime
    if len(terminals) != k_prime or k_prime % 2:
        raise MalformedInputError(f"krv_build needs k′={k_prime} terminals, got {len(terminals)}")

    links = connect_terminals(g, trees.gamma_star(0), terminals)
    owners, components = [], []
    for i, row in enumerate(trees.special):
        link = links[row[0]]
        owners.append(link.source)
        components.append(trees.trees[i] | frozenset(link.edges))

    cut_player = CutPlayer(k_prime, rng)
    matchings: List[Matching] = []
    paths = []
    for j in range(len(grouping)):
        a, b = cut_player.bisect()
        column = trees.gamma_star(j)
        index = {e: i for i, e in enumerate(column)}
        routed = route_within(grouping[j], [column[i] for i in a], [column[i] for i in b])
        ordered = sorted(((index[p.first_edge], index[p.last_edge]), p) for p in routed)
        matching = tuple(pair for pair, _p in ordered)
        paths += [p for _pair, p in ordered]
        cut_player.absorb(matching)
        matchings.append(matching)

    edges = [pair for matching in matchings for pair in matching]
    value, exact = edge_expansion(k_prime, edges)
    expander = EmbeddedExpander(
        terminals=tuple(owners),
        components=tuple(components),
        matchings=tuple(matchings),
        paths=tuple(paths),
        expansion=value,
        expansion_exact=exact,
    )
    load = expander.component_load()
    monitor.check(
        "edge in at most 12 components",
        max(load.values(), default=0) <= COMPONENT_LOAD_LIMIT,
        f"max component load {max(load.values(), default=0)}",
        stage=STAGE,
    )
    embedding = PathSet.of(paths).congestion()
    monitor.check(
        "embedding congestion at most 2",
        embedding <= EMBEDDING_CONGESTION,
        f"congestion {embedding}",
        stage=STAGE,
    )
    expander.verify(g, len(grouping))
    monitor.check(
        "X is a ½-expander",
        value >= EXPANDER_THRESHOLD,
        f"expansion {value:.4f} ({'exact' if exact else 'spectral bound'})",
        stage=STAGE,
        hard=False,
    )
    return expander


__all__ = [
    "CutPlayer",
    "CutTable",
    "edge_expansion",
    "random_matching",
    "adversarial_matching",
    "play_game",
    "krv_harness",
    "krv_build",
    "krv_rounds",
    "PLAYERS",
    "RANDOM_PLAYER",
    "ADVERSARIAL_PLAYER",
    "EXACT_EXPANSION_LIMIT",
]
