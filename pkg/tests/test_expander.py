from collections import Counter
from itertools import combinations

import numpy as np
import pytest

from conftest import pendant_grid
from congroute.errors import InvariantViolation, MalformedInputError, PreconditionError
from congroute.expander.interfaces import connect_terminals, group_interface, route_between, route_within, spread_paths
from congroute.expander.krv import PLAYERS, CutPlayer, edge_expansion, krv_harness, krv_rounds
from congroute.expander.splitting import (
    ZGraph,
    arc_connectivity,
    check_spanning_tree,
    degree_bounded_tree,
    split_off_eulerian,
    tree_root,
)
from congroute.family.models import GoodSubset
from congroute.graph.models import Path, PathSet

TWO_HUBS = [(0, 2), (2, 1), (0, 3), (3, 1), (1, 4), (4, 0), (1, 5), (5, 0)]


def test_split_triangle_keeps_both_directions():
    """Splitting off the middle vertex of a directed triangle leaves a 2-cycle"""
    result = split_off_eulerian([(0, 1), (1, 2), (2, 0)], keep=(0, 2))
    assert result.pairs() == [(2, 0), (0, 2)]
    assert result.arcs[3].route == (0, 1)
    assert result.rounds == 1
    assert all(result.preserved.values())


def test_split_two_hubs_preserves_connectivity():
    """Four detours between two kept vertices become parallel arcs"""
    assert arc_connectivity(TWO_HUBS, (0, 1)) == {(0, 1): 2, (1, 0): 2}
    result = split_off_eulerian(TWO_HUBS, keep=(0, 1))
    assert Counter(result.pairs()) == Counter({(0, 1): 2, (1, 0): 2})
    assert result.preserved == {(0, 1): True, (1, 0): True}
    assert result.dropped_loops == 0


def test_sampled_split_still_preserves():
    """Checking one random pair per round is enough on this digraph"""
    result = split_off_eulerian(TWO_HUBS, keep=(0, 1), rng=np.random.default_rng(2), samples=1)
    assert all(result.preserved.values())


@pytest.mark.parametrize("arcs", [[(0, 1)], [(0, 1), (1, 1), (1, 0)]])
def test_split_rejects_bad_digraphs(arcs):
    """Unbalanced vertices and loops are refused"""
    with pytest.raises(PreconditionError):
        split_off_eulerian(arcs, keep=(0,))


def test_degree_bounded_tree():
    """A star cannot be spanned with degree 3; K4 can"""
    star = [(0, v) for v in range(1, 5)]
    assert degree_bounded_tree(5, star) is None
    tree = degree_bounded_tree(4, list(combinations(range(4), 2)))
    assert check_spanning_tree(4, tree) is None
    assert tree_root(4, tree) in range(4)
    assert check_spanning_tree(5, star) == "degree 4 exceeds 3"
    assert check_spanning_tree(4, [(0, 1), (2, 3)]) == "not a spanning tree"


def test_z_graph_threshold():
    """Only hub pairs with at least ⌈ℓ/γ³⌉ split edges become Z edges"""
    z = ZGraph.build([(0, 1), (1, 0), (1, 2)], gamma=3, ell=54)
    assert z.threshold == 2
    assert z.edges == [(0, 1)]
    assert z.capacity(1) == 2
    assert z.degree_in_split(1) == 3
    assert z.pair_flows() == {(0, 1): 2, (0, 2): 0, (1, 2): 0}
    with pytest.raises(InvariantViolation):
        ZGraph.build([(1, 1)], gamma=3, ell=54)


def test_edge_expansion_small_graphs():
    """Exact enumeration below the limit"""
    assert edge_expansion(2, [(0, 1)]) == (1.0, True)
    assert edge_expansion(4, list(combinations(range(4), 2))) == (2.0, True)
    assert edge_expansion(4, [(0, 1), (2, 3)]) == (0.0, True)


def test_krv_rounds():
    """⌈log₂² n⌉ rounds"""
    assert [krv_rounds(n) for n in (8, 12, 16)] == [9, 13, 16]


@pytest.mark.parametrize("player", PLAYERS)
@pytest.mark.parametrize("n", [8, 12, 16])
def test_krv_games_produce_expanders(n, player):
    """At least 95% of seeded games end with a ½-expander"""
    report = krv_harness(n, player=player, games=200, seed=n)
    assert report.exact
    assert report.rounds == krv_rounds(n)
    assert report.success_rate >= 0.95


def test_cut_player_needs_even_size():
    """An odd vertex count has no bisection"""
    with pytest.raises(MalformedInputError):
        CutPlayer(7, np.random.default_rng(0))


def test_route_between_pairs_edge_sets(grid4):
    """Top-left edges reach bottom-right edges with congestion 2"""
    paths = route_between(grid4, [0, 1], [22, 23])
    assert sorted(p.first_edge for p in paths) == [0, 1]
    assert sorted(p.last_edge for p in paths) == [22, 23]
    assert paths.congestion() <= 2
    with pytest.raises(MalformedInputError):
        route_between(grid4, [0, 1], [23])


def test_shared_edges_route_in_place(grid4):
    """An edge in both sets is its own path"""
    paths = route_between(grid4, [5, 0], [5, 23])
    (same,) = [p for p in paths if p.first_edge == 5]
    assert same.edges == (5,)


def test_connect_terminals_reaches_every_edge(grid4):
    links = connect_terminals(grid4, [21, 23], [0, 3])
    assert set(links) == {21, 23}
    assert {p.source for p in links.values()} == {0, 3}
    assert all(p.last_edge == e for e, p in links.items())


def test_group_interface_and_route_within():
    """A 3x3 grid core with four interface pendants keeps two representatives"""
    g = pendant_grid()
    subset = GoodSubset(frozenset(range(9)), frozenset({12, 13, 14, 15}), PathSet.of(()))
    s = group_interface(g, 0, subset, p=1, k_star=2)
    s.verify(1, 2)
    assert len(s.representatives) == 2
    assert set(s.representatives) <= subset.interface
    first, second = s.representatives
    (path,) = route_within(s, [first], [second])
    path.validate(g)
    assert path.first_edge == first and path.last_edge == second
    assert set(path.vertices[1:-1]) <= subset.vertices
    with pytest.raises(MalformedInputError):
        route_within(s, [16], [first])


def full_interface_core(p: int):
    subset = GoodSubset(frozenset(range(9)), frozenset(range(12, 20)), PathSet.of(()))
    return group_interface(pendant_grid(), 0, subset, p=p, k_star=2)


def test_subgroups_spread_along_group_trees():
    """With p=2 the pendants split into {16, 19} and the rest; representatives reach their subgroups in-tree"""
    s = full_interface_core(2)
    s.verify(2, 2)
    assert s.representatives == (12, 16)
    assert s.subgroups == {12: frozenset({12, 13}), 16: frozenset({16, 19})}
    assert spread_paths(s, 12) == {12: Path((0,), ()), 13: Path((0, 1), (0,))}
    assert spread_paths(s, 16) == {16: Path((5,), ()), 19: Path((5, 8), (9,))}
    for e in s.representatives:
        assert all(set(path.edges) <= s.trees[e] for path in spread_paths(s, e).values())


def test_route_within_through_subgroups():
    """The routed path leaves by one representative and enters by the other, staying in the core"""
    g = pendant_grid()
    s = full_interface_core(2)
    (path,) = route_within(s, [12], [16])
    path.validate(g)
    assert path.first_edge == 12 and path.last_edge == 16
    assert path.source == 9 and path.target == 13
    assert set(path.vertices[1:-1]) <= set(range(9))

    both = route_within(s, [12, 16], [16, 12])
    assert [p.edges for p in both] == [(12,), (16,)]
    assert both.congestion() == 1
