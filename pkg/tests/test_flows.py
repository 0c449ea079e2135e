import logging
from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linprog

from conftest import cycle_graph, grid_graph, path_graph
from congroute.errors import MalformedInputError
from congroute.flows.concurrent import CONCURRENT_MODE, LP_MODE, approx_concurrent_flow
from congroute.flows.maxflow import FlowProblem, max_flow_integral, max_flow_value, min_cut, route_matching
from congroute.graph.models import MultiGraph

EPSILON = 0.05


def small_graph(seed: int) -> MultiGraph:
    """Connected multigraph on 4..6 vertices: a spanning path plus random extra edges"""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 7))
    edges = [(i, i + 1) for i in range(n - 1)]
    for _ in range(int(rng.integers(1, n + 2))):
        a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
        edges.append((a, b))
    return MultiGraph.from_edge_list(range(n), edges)


def brute_min_cut(g: MultiGraph, s: int, t: int) -> int:
    others = sorted(g.vertices - {s, t})
    best = g.num_edges
    for size in range(len(others) + 1):
        for extra in combinations(others, size):
            best = min(best, len(g.out_edges({s, *extra})))
    return best


def path_lp(g: MultiGraph, pairs, concurrent: bool) -> float:
    """Exact optimum of the path formulation over all simple paths"""
    mg = g.to_networkx()
    columns = []
    for i, (s, t) in enumerate(pairs):
        for path in nx.all_simple_edge_paths(mg, s, t):
            columns.append((i, {key for _u, _v, key in path}))
    eids = list(g.edge_ids)
    k, width = len(pairs), len(columns)
    if concurrent:
        # variables: path flows then lambda
        c = np.zeros(width + 1)
        c[-1] = -1
        rows, rhs = [], []
        for e in eids:
            rows.append([1.0 if e in used else 0.0 for _i, used in columns] + [0.0])
            rhs.append(1.0)
        for i in range(k):
            rows.append([-1.0 if j == i else 0.0 for j, _used in columns] + [1.0])
            rhs.append(0.0)
    else:
        c = -np.ones(width)
        rows, rhs = [], []
        for e in eids:
            rows.append([1.0 if e in used else 0.0 for _i, used in columns])
            rhs.append(1.0)
        for i in range(k):
            rows.append([1.0 if j == i else 0.0 for j, _used in columns])
            rhs.append(1.0)
    result = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=(0, None), method="highs")
    return -result.fun


@pytest.mark.parametrize("seed", range(12))
def test_max_flow_matches_brute_force_cut(seed):
    """Max-flow value and path count equal the minimum edge cut on small graphs"""
    g = small_graph(seed)
    s, t = 0, max(g.vertices)
    expected = brute_min_cut(g, s, t)
    problem = FlowProblem(g, source_vertices=frozenset({s}), sink_vertices=frozenset({t}))
    assert max_flow_value(problem) == expected
    result = max_flow_integral(problem)
    assert result.value == expected
    result.paths.validate(g)
    assert result.paths.congestion() <= 1
    assert all(p.source == s and p.target == t for p in result.paths)
    value, source_side, _sink_side = min_cut(problem)
    assert value == expected
    assert len(g.out_edges(source_side)) == expected


def test_infeasible_demand_returns_cut():
    """Asking for more than the cut allows yields the separating side"""
    g = path_graph(4)
    problem = FlowProblem(g, source_vertices=frozenset({0}), sink_vertices=frozenset({3}))
    result = max_flow_integral(problem, 2)
    assert not result.feasible
    assert result.value == 1
    assert 0 in result.cut and 3 not in result.cut
    assert len(result.cut_edges) == 1


def test_edge_terminals_count_against_their_capacity():
    """Edge sources and sinks route through the edges themselves"""
    g = path_graph(4)
    problem = FlowProblem(g, source_edges=frozenset({0}), sink_edges=frozenset({2}), source_limit=1, sink_limit=1)
    result = max_flow_integral(problem, 1)
    assert result.feasible
    (path,) = result.paths
    assert path.first_edge == 0 and path.last_edge == 2


def test_capacity_two_doubles_the_flow():
    """A cycle carries 2 units between opposite vertices, 4 with capacity 2"""
    g = cycle_graph(6)
    unit = FlowProblem(g, source_vertices=frozenset({0}), sink_vertices=frozenset({3}))
    double = FlowProblem(g, source_vertices=frozenset({0}), sink_vertices=frozenset({3}), capacity=2)
    assert max_flow_value(unit) == 2
    result = max_flow_integral(double, 4)
    assert result.feasible
    assert result.paths.congestion() <= 2


def test_overlapping_terminals_rejected():
    """A vertex cannot be both source and sink"""
    g = path_graph(3)
    with pytest.raises(MalformedInputError):
        FlowProblem(g, source_vertices=frozenset({1}), sink_vertices=frozenset({1}))


def test_route_matching_budget(caplog):
    """The crossing matching on a 4-cycle needs congestion 2"""
    g = cycle_graph(4)
    matching = [(0, 2), (1, 3)]
    with caplog.at_level(logging.WARNING, logger="congroute.flows.maxflow"):
        unit = route_matching(g, matching, budget=1)
    assert not unit.feasible
    assert unit.value == 1
    assert not unit.certified
    assert unit.cut is not None
    (record,) = [r for r in caplog.records if r.name == "congroute.flows.maxflow"]
    assert record.levelno == logging.WARNING
    assert "routed 1/2 pairs at congestion 1" in record.getMessage()

    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="congroute.flows.maxflow"):
        double = route_matching(g, matching, budget=2)
    assert double.feasible
    assert double.paths.congestion() <= 2
    assert not caplog.records


def test_route_matching_rejects_repeated_vertex():
    """Matchings are vertex-disjoint"""
    with pytest.raises(MalformedInputError):
        route_matching(path_graph(3), [(0, 1), (1, 2)])


@pytest.mark.parametrize("seed", range(8))
def test_lp_value_within_epsilon_of_path_lp(seed):
    """The multiplicative-weights LP value is feasible and within ε of the exact optimum"""
    g = small_graph(100 + seed)
    rng = np.random.default_rng(seed)
    vertices = sorted(g.vertices)
    pairs = []
    for _ in range(2):
        a, b = (int(x) for x in rng.choice(vertices, size=2, replace=False))
        pairs.append((a, b))
    optimum = path_lp(g, pairs, concurrent=False)
    result = approx_concurrent_flow(g, pairs, epsilon=EPSILON, mode=LP_MODE)
    value = float(result.value)
    assert value <= optimum + 1e-6
    assert value >= (1 - EPSILON) * optimum - 1e-6
    assert result.max_load <= 1 + 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_concurrent_value_within_epsilon(seed):
    """Concurrent fraction λ is feasible and within ε of the exact optimum"""
    g = small_graph(200 + seed)
    vertices = sorted(g.vertices)
    pairs = [(vertices[0], vertices[-1]), (vertices[1], vertices[-2])]
    optimum = path_lp(g, pairs, concurrent=True)
    result = approx_concurrent_flow(g, pairs, epsilon=EPSILON, mode=CONCURRENT_MODE)
    value = float(result.value)
    assert value <= optimum + 1e-6
    assert value >= (1 - EPSILON) * optimum - 1e-6


def test_flow_paths_are_valid():
    """Every path of the fractional flow lies in the graph and joins its pair"""
    g = grid_graph(3, 3)
    pairs = [(0, 8), (2, 6)]
    result = approx_concurrent_flow(g, pairs, epsilon=EPSILON, mode=LP_MODE)
    for (s, t), flows in zip(pairs, result.flows):
        for path, amount in flows:
            path.validate(g)
            assert {path.source, path.target} == {s, t}
            assert amount > 0


def test_no_pairs_gives_zero():
    """An empty demand list has value zero"""
    result = approx_concurrent_flow(path_graph(3), [], epsilon=EPSILON)
    assert result.value == 0


def test_terminal_groups_send_one_unit_each():
    """A source group feeds one unit however many of its vertices could send"""
    g = path_graph(4)
    one = FlowProblem(g, source_groups=(frozenset({0, 1}),), sink_vertices=frozenset({3}), capacity=2)
    assert max_flow_value(one) == 1

    two = FlowProblem(
        g,
        capacity=2,
        source_groups=(frozenset({0, 1}), frozenset({1})),
        sink_groups=(frozenset({3}), frozenset({2, 3})),
    )
    result = max_flow_integral(two, demand=2)
    assert result.feasible
    assert sorted(i for i, _j in result.ends) == [0, 1]
    assert sorted(j for _i, j in result.ends) == [0, 1]
    for path, (i, j) in zip(result.paths, result.ends):
        assert path.source in two.source_groups[i]
        assert path.target in two.sink_groups[j]
    assert result.paths.congestion() <= 2

    with pytest.raises(MalformedInputError):
        FlowProblem(g, source_groups=(frozenset(),), sink_vertices=frozenset({3}))
