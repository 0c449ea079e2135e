from collections import Counter

import numpy as np
import pytest

from conftest import complete_graph, path_graph, random_regular
from congroute.errors import MalformedInputError, VerificationFailure
from congroute.expander.krv import edge_expansion
from congroute.expander.models import EmbeddedExpander
from congroute.graph.models import MultiGraph, Path
from congroute.instances.models import Instance
from congroute.monitoring import StageMonitor
from congroute.routing.fallback import single_pair_route
from congroute.routing.greedy import greedy_route, path_length_bound, routed_floor
from congroute.routing.translate import CONNECTOR_SEGMENT, EMBEDDING_SEGMENT, RoutingResult, translate
from congroute.routing.verify import verify_routing


def line_expander() -> EmbeddedExpander:
    """Two X vertices on path_graph(6): components {0-1} and {4-5}, one X edge along 1..4"""
    return EmbeddedExpander(
        terminals=(0, 5),
        components=(frozenset({0}), frozenset({4})),
        matchings=(((0, 1),),),
        paths=(Path((1, 2, 3, 4), (1, 2, 3)),),
    )


def test_greedy_on_complete_graph():
    """Every pair of K8 is adjacent"""
    pairs = [(0, 1), (2, 3), (4, 5), (6, 7)]
    result = greedy_route(complete_graph(8), pairs)
    assert result.routed == 4
    assert all(len(result.paths[i]) == 1 for i in range(4))
    assert result.d == 7


def test_greedy_respects_length_bound():
    """A pair farther apart than ℓ stays unrouted"""
    result = greedy_route(path_graph(10), [(0, 9)], ell=3)
    assert result.routed == 0
    assert result.deleted == ()


@pytest.mark.parametrize("d", [6, 8])
@pytest.mark.parametrize("n", [256, 1024])
def test_greedy_meets_floor_on_random_regular(d, n):
    """Vertex-disjoint short paths on a ½-expander, at least the floor many"""
    x = random_regular(d, n, seed=d * n)
    value, exact = edge_expansion(n, list(x.edges.values()))
    assert not exact and value >= 0.5
    order = [int(v) for v in np.random.default_rng(n + d).permutation(n)]
    pairs = [(order[i], order[i + 1]) for i in range(0, n, 2)]
    monitor = StageMonitor()
    result = greedy_route(x, pairs, expansion_checked=True, monitor=monitor)
    assert result.ell == path_length_bound(n, d)
    assert result.bound == routed_floor(n, d, result.ell)
    assert result.routed >= max(result.bound, 1)
    assert not monitor.failed
    seen = Counter(v for path in result.paths.values() for v in path.vertices)
    assert max(seen.values()) == 1
    for i, path in result.paths.items():
        path.validate(x)
        assert len(path) <= result.ell
        assert {path.source, path.target} == set(pairs[i])


def test_greedy_rejects_shared_terminals():
    """Expander demand pairs must not share vertices"""
    with pytest.raises(MalformedInputError):
        greedy_route(complete_graph(4), [(0, 1), (1, 2)])


def test_translate_nothing():
    assert translate(path_graph(3), [], line_expander()) == RoutingResult()


def test_translate_through_components():
    """Connector, embedding path, connector"""
    g = path_graph(6)
    emb = line_expander()
    emb.verify(g, gamma=1)
    result = translate(g, [Path((0, 1), (0,))], emb)
    (path,) = result.paths
    assert path.vertices == (0, 1, 2, 3, 4, 5)
    assert result.pairs == ((0, 5),)
    assert result.segments == (((CONNECTOR_SEGMENT, 0), (EMBEDDING_SEGMENT, 0), (CONNECTOR_SEGMENT, 1)),)
    assert result.embedding_load == Counter({1: 1, 2: 1, 3: 1})
    assert result.connector_load == Counter({0: 1, 4: 1})
    assert result.congestion() == 1


def test_translate_rejects_overlapping_x_paths():
    emb = line_expander()
    with pytest.raises(MalformedInputError):
        translate(path_graph(6), [Path((0, 1), (0,)), Path((1, 0), (0,))], emb)


def test_verify_accepts_congestion_fourteen():
    """Fourteen copies of one pair on a path load each edge fourteen times"""
    inst = Instance(path_graph(4), ((0, 3),) * 15)
    path = Path((0, 1, 2, 3), (0, 1, 2))
    report = verify_routing(inst, [((0, 3), path)] * 14, lp_value=15.0)
    assert report.passed
    assert report.max_load == 14
    assert report.routed == 14


def test_verify_reports_overloaded_edge():
    """The smallest edge at maximum load is named"""
    inst = Instance(path_graph(4), ((0, 3),) * 15)
    path = Path((0, 1, 2, 3), (0, 1, 2))
    with pytest.raises(VerificationFailure) as excinfo:
        verify_routing(inst, [((0, 3), path)] * 15)
    assert excinfo.value.edge_id == 0


@pytest.mark.parametrize(
    "routed",
    [
        [((0, 2), Path((0, 1, 2), (0, 1)))],
        [((0, 3), Path((0, 1, 2), (0, 1)))],
        [((0, 3), Path((0, 1, 2, 3), (0, 1, 2)))] * 2,
        [((0, 3), Path((0, 2, 3), (1, 2)))],
    ],
    ids=["undemanded", "wrong-endpoint", "routed-twice", "not-a-path"],
)
def test_verify_rejects_bad_routings(routed):
    inst = Instance(path_graph(4), ((0, 3),))
    with pytest.raises(VerificationFailure):
        verify_routing(inst, routed)


def test_verify_ignores_pair_orientation():
    """A demand (3, 0) is met by a path from 0 to 3"""
    inst = Instance(path_graph(4), ((3, 0),))
    report = verify_routing(inst, [((0, 3), Path((0, 1, 2, 3), (0, 1, 2)))])
    assert report.passed


def test_single_pair_fallback():
    """The first connected pair is routed alone"""
    g = MultiGraph.from_edge_list(range(6), [(0, 1), (1, 2), (3, 4), (4, 5)])
    route = single_pair_route(g, [(0, 5), (3, 5)], reason="k too small")
    assert route.index == 1
    assert route.path.vertices == (3, 4, 5)
    assert single_pair_route(g, [(0, 5)], reason="k too small") is None
