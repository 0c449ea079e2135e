from collections import Counter
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from conftest import clique_barbell, complete_graph, path_graph
from congroute.errors import InvariantViolation, MalformedInputError
from congroute.graph.models import MultiGraph, congestion
from congroute.instances.models import MAX_DEGREE, Instance, SubInstance
from congroute.instances.normalize import normalize
from congroute.instances.partition import lp_value, partition_flow_well_linked, select_pairs, spot_check


def random_instance(seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 12))
    g = MultiGraph.from_networkx(nx.gnm_random_graph(n, int(rng.integers(n, 3 * n)), seed=seed))
    pairs = []
    for _ in range(int(rng.integers(1, 5))):
        a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
        pairs.append((a, b))
    return Instance(g, tuple(pairs))


def test_identical_endpoints_rejected():
    """A pair must join two distinct vertices"""
    with pytest.raises(MalformedInputError):
        Instance(path_graph(3), ((1, 1),))


def test_normalized_instance_is_kept():
    """Degree-1 terminals used once need no gadgets"""
    raw = Instance(path_graph(4), ((0, 3),))
    assert raw.is_normalized
    assert normalize(raw) is raw


def test_complete_graph_gets_pendants_and_grids():
    """K5 with a terminal shared by two pairs"""
    raw = Instance(complete_graph(5), ((0, 1), (0, 2)))
    assert "terminal 0 is in 2 pairs" in raw.terminal_violations()
    inst = normalize(raw)
    assert inst.is_normalized
    assert inst.graph.max_degree() <= MAX_DEGREE
    assert len(inst.terminals) == 4
    assert [inst.origin_pair(i) for i in range(inst.k)] == [(0, 1), (0, 2)]
    assert inst.original is raw


@pytest.mark.parametrize("seed", range(100))
def test_normalized_routes_map_back_without_extra_congestion(seed):
    """Edge-disjoint routes in the normalized graph stay edge-disjoint in the original"""
    raw = random_instance(seed)
    inst = normalize(raw)
    assert inst.is_normalized
    assert inst.k == raw.k
    used: Counter = Counter()
    mapped = []
    for i, (s, t) in enumerate(inst.pairs):
        path = inst.graph.bfs_path(s, t, usable=lambda eid: used[eid] == 0)
        if path is None:
            continue
        used.update(path.edges)
        back = inst.map_back(path)
        back.validate(raw.graph)
        assert {back.source, back.target} == set(raw.pairs[i])
        mapped.append(back)
    assert congestion(mapped, raw.graph) <= 1


def test_lp_value_of_single_path():
    """One pair on a path carries almost one unit"""
    value = lp_value(Instance(path_graph(4), ((0, 3),)))
    assert 0.95 <= float(value) <= 1


def test_single_pair_partition():
    """A lone pair is one sub-instance that keeps its pair"""
    inst = Instance(path_graph(4), ((0, 3),))
    subs = partition_flow_well_linked(inst, rng=np.random.default_rng(1), spotchecks=3)
    assert len(subs) == 1
    (sub,) = subs
    assert sub.pairs == ((0, 3),)
    assert sub.graph.vertices == frozenset(range(4))
    assert len(sub.charge_ledger) == 1
    assert [kind for _m, kind in sub.spotchecks] == ["integral"] * 3


def test_components_become_separate_subinstances():
    """Pairs with no path get no LP weight and are dropped"""
    g = MultiGraph.from_edge_list(range(8), [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7)])
    inst = Instance(g, ((0, 3), (4, 7), (1, 6)))
    subs = partition_flow_well_linked(inst, spotchecks=0)
    assert [sub.pairs for sub in subs] == [((0, 3),), ((4, 7),)]
    assert not subs[0].graph.vertices & subs[1].graph.vertices


def test_selection_charges_pairs_sharing_a_group():
    """Total weight below 3p leaves one group, so one pair is kept and the other charged to it"""
    g = path_graph(6)
    weights = {0: Fraction(1), 5: Fraction(1), 1: Fraction(1), 4: Fraction(1)}
    sub = SubInstance(g, candidates=((0, 5), (1, 4)), weights=weights)
    select_pairs(sub)
    assert sub.pairs == ((0, 5),)
    assert sub.charge_ledger == [((0, 5), Fraction(4), True)]


def test_spot_check_passes_on_complete_graph():
    """Every matching of K8 routes on its own edges"""
    records = spot_check(complete_graph(8), range(8), np.random.default_rng(5), 5)
    assert len(records) == 5
    assert all(kind == "integral" for _m, kind in records)


def test_spot_check_catches_bottleneck():
    """Four pairs across a single bridge cannot reach half a unit each"""
    g = clique_barbell().induced(range(8))
    with pytest.raises(InvariantViolation) as excinfo:
        spot_check(g, range(8), np.random.default_rng(11), 60)
    assert excinfo.value.stage == "instance-prep"
