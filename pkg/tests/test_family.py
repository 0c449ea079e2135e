from fractions import Fraction

import numpy as np
import pytest

from conftest import TOY_OVERRIDES, grid_graph, pendant_grid
from congroute.cuts.oracle import EXACT, CutOracle
from congroute.errors import MalformedInputError, ParameterDegeneracyError, StochasticFailure
from congroute.family.contracted import LegalContractedGraph, check_legality, cluster_spot_checks
from congroute.family.params import ParamConstants, ParamTable, flow_cut_gap, log2
from congroute.family.search import find_good_family, partition_conditions, sample_partition
from congroute.monitoring import StageMonitor


def test_log2_and_flow_cut_gap():
    """Powers of two are exact; the gap is at least one"""
    assert log2(1024) == 10
    assert flow_cut_gap(0) == 1
    assert flow_cut_gap(6) == 3
    assert flow_cut_gap(14) == 4
    assert flow_cut_gap(14, Fraction(1, 2)) == 2


def test_formula_table_at_small_k():
    """k=4 gives γ=4, α=1/16384 and no room for k1"""
    table = ParamTable.for_k(4)
    assert table.gamma == 4
    assert table.alpha_arv == 2
    assert table.alpha == Fraction(1, 16384)
    assert table.alpha_wl == Fraction(1, 32768)
    assert table.beta == 3
    assert table.k1 == 0
    assert table.degeneracy() == "k1=0 is not positive"
    with pytest.raises(ParameterDegeneracyError):
        table.require_usable()


def test_overrides_replace_values_before_dependents():
    """An overridden γ feeds k1, k* and k'"""
    table = ParamTable.for_k(4, ParamConstants(), TOY_OVERRIDES)
    assert table.gamma == 1
    assert table.k1 == 4
    assert table.path_length == 4
    assert table.overridden == tuple(sorted(TOY_OVERRIDES))
    assert table.degeneracy() is None
    echo = table.echo()
    assert isinstance(echo["alpha"], float)
    assert echo["overridden"] == sorted(TOY_OVERRIDES)


def test_unknown_override_rejected():
    """Only derived parameters may be overridden"""
    with pytest.raises(MalformedInputError):
        ParamTable.for_k(4, ParamConstants(), {"beta": 2})


def test_minimal_k_is_the_first_usable_value():
    """The search stops exactly at the degeneracy boundary"""
    k = ParamTable.minimal_k()
    assert k is not None
    assert ParamTable.for_k(k).degeneracy() is None
    assert ParamTable.for_k(k - 1).degeneracy() is not None


def test_trivial_contraction_is_legal():
    """With no clusters only the edge floor remains to report"""
    g = pendant_grid()
    lcg = LegalContractedGraph.trivial(g, range(9, 17))
    report = check_legality(lcg, k=4, k1=4, alpha_wl=Fraction(1, 2))
    assert report.passed
    assert report.outside_edges == 12
    assert report.enough_edges
    assert lcg.v1 == g.vertices and not lcg.v2


def test_cluster_spot_checks_on_well_connected_cluster(rng):
    """Random halves of the boundary of a 3x3 grid core route almost fully"""
    g = pendant_grid()
    checks = cluster_spot_checks(g, frozenset(range(9)), Fraction(1, 4), rng, count=5)
    assert len(checks) == 5
    assert all(c.half == 4 for c in checks)
    assert all(c.passed for c in checks)


def test_partition_conditions_single_part():
    """One part holding every vertex satisfies both conditions"""
    g = grid_graph(3, 3)
    (row,) = partition_conditions(g, [g.vertices], 1)
    assert row == (0, 12, True)


def test_sample_partition_gives_up(rng):
    """Fifty parts of a tiny graph can never all hold an edge"""
    lcg = LegalContractedGraph.trivial(pendant_grid(), range(9, 17))
    monitor = StageMonitor()
    with pytest.raises(StochasticFailure):
        sample_partition(lcg, 50, rng, retry_budget=5, monitor=monitor)
    assert monitor.retries["good-family"] == 5


def test_good_family_on_pendant_grid():
    """With γ=1 the whole grid core is one good subset"""
    g = pendant_grid()
    terminals = frozenset(range(9, 17))
    params = ParamTable.for_k(4, ParamConstants(), TOY_OVERRIDES)
    monitor = StageMonitor()
    family = find_good_family(g, terminals, params, np.random.default_rng(3), CutOracle(EXACT), monitor)
    assert len(family) == 1
    assert family.rounds == 1
    (subset,) = family.sets
    assert subset.vertices == frozenset(range(9))
    assert len(subset.interface) == 4
    assert subset.interface <= frozenset(range(12, 20))
    assert set(subset.terminal_of()) == set(subset.interface)
    family.verify(g, terminals, 1)
    assert all(c.passed for c in monitor.checks if c.hard)


def test_good_family_refuses_degenerate_parameters(rng):
    """Formula values at k=4 cannot drive the search"""
    with pytest.raises(ParameterDegeneracyError):
        find_good_family(pendant_grid(), range(9, 17), ParamTable.for_k(4), rng)


def starved_core_params() -> ParamTable:
    """k1=9 exceeds the eight terminal edges of the pendant grid core"""
    return ParamTable.for_k(8, ParamConstants(), {**TOY_OVERRIDES, "k1": 9})


def test_failed_round_contracts_the_core():
    """A part that cannot reach k1 terminals is decomposed and contracted; the edge count drops"""
    g = pendant_grid()
    monitor = StageMonitor()
    with pytest.raises(StochasticFailure):
        find_good_family(
            g, range(9, 17), starved_core_params(), np.random.default_rng(3), CutOracle(EXACT), monitor, retry_budget=3
        )
    (event,) = [e for e in monitor.events if e.get("outcome") == "contracted"]
    assert event["round"] == 1
    assert event["inactive"] == 1 and event["splits"] == 0
    assert event["edges_before"] == 20
    assert event["edges_after"] == 8
    assert event["edges_after"] < event["edges_before"]
    assert event["edges_after"] <= event["chain_bound"] < event["edges_before"]
    assert event["chain_bound"] == pytest.approx(20 - 8 * 21 / 20 + 8 * 65 / 64)
    shrink = [c for c in monitor.checks if c.name == "|E(G″)| < |E(G′)|"]
    chain = [c for c in monitor.checks if c.name == "contraction inequality chain"]
    assert [(c.passed, c.hard) for c in shrink + chain] == [(True, True), (True, True)]


def test_contracted_graph_exhausts_the_retry_budget():
    """Once the core is one super-node no partition of G′∖T holds an edge"""
    monitor = StageMonitor()
    with pytest.raises(StochasticFailure) as excinfo:
        find_good_family(
            pendant_grid(),
            range(9, 17),
            starved_core_params(),
            np.random.default_rng(3),
            CutOracle(EXACT),
            monitor,
            retry_budget=4,
        )
    assert "4 attempts" in excinfo.value.message
    assert monitor.retries["good-family"] == 4
    legal = [c for c in monitor.checks if c.name == "legal contracted graph"]
    assert len(legal) == 2 and all(c.passed for c in legal)
