from fractions import Fraction

import pytest

from conftest import clique_barbell, grid_graph
from congroute.cuts.oracle import EXACT, CutOracle
from congroute.decomposition.grouping import group_by_tree, group_edges, group_terminals
from congroute.decomposition.welllinked import decompose, decompose_bounded
from congroute.errors import InvariantViolation, MalformedInputError, PreconditionError
from congroute.family.params import ParamConstants, ParamTable
from congroute.graph.models import MultiGraph

HALF = Fraction(1, 2)


def test_barbell_decomposes_into_its_cliques():
    """A loose alpha splits at the bridge and records the charge total"""
    g = clique_barbell()
    result = decompose(g, range(8), 6, CutOracle(EXACT), HALF, gamma=1)
    assert result.clusters == [frozenset(range(4)), frozenset(range(4, 8))]
    assert result.boundary == [4, 4]
    assert result.total_boundary == 8
    assert result.charge_history == [8]
    assert result.charge_bound == Fraction(6) * Fraction(65, 64)
    assert not result.bound_enforced
    assert not result.bound_held
    assert result.certified
    assert result.cluster_of(5) == frozenset(range(4, 8))


def test_enforced_charge_bound_is_hard():
    """With the bound enforced the same split is an invariant violation"""
    with pytest.raises(InvariantViolation):
        decompose(clique_barbell(), range(8), 6, CutOracle(EXACT), HALF, gamma=1, enforce_bound=True)


def test_formula_alpha_keeps_the_set_whole():
    """alpha(k) is far too small for a single bridge to violate"""
    g = clique_barbell()
    params = ParamTable.for_k(6)
    result = decompose_bounded(g, range(8), 6, params, CutOracle(EXACT))
    assert result.clusters == [frozenset(range(8))]
    assert result.boundary == [6]
    assert result.bound_enforced
    assert result.bound_held
    assert result.total_boundary <= result.charge_bound


def test_overridden_alpha_through_bounded_entry():
    """Overrides feed alpha and gamma into the bounded decomposition"""
    params = ParamTable.for_k(6, ParamConstants(), {"alpha": HALF, "gamma": 1})
    result = decompose_bounded(clique_barbell(), range(8), 6, params, CutOracle(EXACT))
    assert len(result.clusters) == 2
    assert all(b <= 6 for b in result.boundary)


def test_boundary_above_k_rejected():
    """decompose_bounded needs |out(S)| <= k"""
    with pytest.raises(PreconditionError):
        decompose_bounded(clique_barbell(), range(8), 5, ParamTable.for_k(5))


def test_empty_set_rejected():
    """There is nothing to decompose"""
    with pytest.raises(MalformedInputError):
        decompose(clique_barbell(), [], 6, CutOracle(), HALF, gamma=1)


@pytest.mark.parametrize("p", [1, 2, 4, 7])
def test_group_terminals_weight_bounds(p):
    """Every group weighs between p and 3p and the trees share no edge"""
    g = grid_graph(6, 6)
    grouping = group_terminals(g, g.vertices, p)
    assert set().union(*grouping.groups) == set(g.vertices)
    assert all(p <= w <= 3 * p for w in grouping.weights)
    used = [eid for tree in grouping.trees for eid in tree]
    assert len(used) == len(set(used))
    for group, tree in zip(grouping.groups, grouping.trees):
        if len(group) > 1:
            touched = {v for eid in tree for v in g.endpoints(eid)}
            assert group <= touched


def test_sparse_terminals_group_along_tree():
    """Zero-weight vertices only carry trees"""
    g = grid_graph(5, 5)
    terminals = [0, 4, 12, 20, 24, 7, 17]
    grouping = group_terminals(g, terminals, 2)
    assert set().union(*grouping.groups) == set(terminals)
    assert all(2 <= w <= 6 for w in grouping.weights)
    assert grouping.group_of(12) in range(len(grouping))


def test_small_total_is_one_undersized_group():
    """Weight below p yields a single flagged group"""
    g = grid_graph(3, 3)
    grouping = group_terminals(g, [0, 8], 5)
    assert len(grouping) == 1
    assert grouping.undersized
    assert grouping.groups[0] == frozenset({0, 8})


def test_group_edges_partitions_edge_set():
    """Edge groups hold between p and 3p edges each"""
    g = grid_graph(4, 4)
    chosen = list(g.edge_ids)
    grouping = group_edges(g, chosen, 3)
    assert set().union(*grouping.groups) == set(chosen)
    assert all(3 <= w <= 9 for w in grouping.weights)


def test_heavy_vertex_rejected():
    """A single vertex heavier than p cannot be grouped"""
    with pytest.raises(PreconditionError):
        group_by_tree(grid_graph(2, 2), {0: 5}, 2)


def test_disconnected_graph_rejected():
    """Grouping needs one spanning tree"""
    g = MultiGraph.from_edge_list(range(4), [(0, 1), (2, 3)])
    with pytest.raises(PreconditionError):
        group_terminals(g, [0, 2], 1)
