from fractions import Fraction
from itertools import combinations

import pytest

from conftest import clique_barbell
from congroute.cuts.oracle import EXACT, SPECTRAL, CutOracle, ViolatingCut, find_violating_cut, is_violating
from congroute.cuts.spectral import fiedler_order
from congroute.errors import MalformedInputError, OracleTooLargeError, PreconditionError
from congroute.graph.models import MultiGraph

HALF = Fraction(1, 2)


def grid_block(offset: int):
    edges = []
    for r in range(4):
        for c in range(3):
            v = offset + r * 3 + c
            if c + 1 < 3:
                edges.append((v, v + 1))
            if r + 1 < 4:
                edges.append((v, v + 3))
    return edges


def grid_barbell() -> MultiGraph:
    """Two 4x3 grids {0..11}, {12..23} joined by edge 11-12 with three leaves on each side"""
    edges = grid_block(0) + grid_block(12) + [(11, 12)]
    edges += [(0, 24), (1, 25), (2, 26), (21, 27), (22, 28), (23, 29)]
    return MultiGraph.from_edge_list(range(30), edges)


@pytest.mark.parametrize("mode", [EXACT, SPECTRAL])
def test_barbell_splits_at_the_bridge(mode):
    """Both modes find the single bridge separating three terminals from three"""
    g = clique_barbell()
    cut = find_violating_cut(g, range(8), 6, HALF, mode=mode)
    assert cut is not None
    assert cut.x == frozenset(range(4))
    assert cut.y == frozenset(range(4, 8))
    assert cut.size == 1
    assert cut.witness == 3
    assert is_violating(g, range(8), cut, 6, HALF)


def test_endpoint_enumeration_on_larger_sets():
    """Sets above the vertex enumeration limit use endpoint assignments plus min cuts"""
    g = grid_barbell()
    cut = find_violating_cut(g, range(24), 6, HALF, mode=EXACT)
    assert cut is not None
    assert cut.x == frozenset(range(12))
    assert cut.size == 1


def test_clique_with_leaves_is_well_linked():
    """No split of K4 beats half its terminal count"""
    edges = list(combinations(range(4), 2)) + [(v, v + 4) for v in range(4)]
    g = MultiGraph.from_edge_list(range(8), edges)
    assert find_violating_cut(g, range(4), 4, HALF, mode=EXACT) is None
    oracle = CutOracle(EXACT)
    assert oracle(g, range(4), 4, HALF) is None
    assert oracle.certifies(g, range(4))
    assert oracle.calls == 1 and oracle.exact_calls == 1


def test_spectral_answers_never_certify():
    """A spectral miss is only a heuristic"""
    g = clique_barbell()
    assert not CutOracle(SPECTRAL).certifies(g, range(8))


def test_exact_mode_refuses_large_boundaries():
    """Six terminal edges exceed a size bound of three"""
    with pytest.raises(OracleTooLargeError):
        find_violating_cut(clique_barbell(), range(8), 6, HALF, mode=EXACT, size_bound=3)


def test_tampered_cut_fails_recheck():
    """Witness edges must sit on their own side"""
    g = clique_barbell()
    cut = find_violating_cut(g, range(8), 6, HALF, mode=EXACT)
    swapped = ViolatingCut(x=cut.x, y=cut.y, t1=cut.t2, t2=cut.t1, crossing=cut.crossing)
    assert not is_violating(g, range(8), swapped, 6, HALF)
    assert not is_violating(g, range(8), cut, 6, Fraction(1, 4))


def test_terminals_must_leave_the_set():
    """A terminal edge inside S is rejected"""
    with pytest.raises(MalformedInputError):
        find_violating_cut(clique_barbell(), range(8), 6, HALF, terminals=[0])


@pytest.mark.parametrize("alpha", [Fraction(0), Fraction(1), Fraction(3, 2)])
def test_alpha_outside_unit_interval(alpha):
    """alpha must lie strictly between 0 and 1"""
    with pytest.raises(PreconditionError):
        find_violating_cut(clique_barbell(), range(8), 6, alpha)


def test_unknown_oracle_mode():
    """Only exact, spectral and auto exist"""
    with pytest.raises(MalformedInputError):
        CutOracle("magic")


def test_fiedler_order_separates_blocks():
    """The two cliques occupy opposite ends of the Fiedler order"""
    g = clique_barbell().induced(range(8))
    order = fiedler_order(g)
    assert sorted(order) == list(range(8))
    assert {frozenset(order[:4]), frozenset(order[4:])} == {frozenset(range(4)), frozenset(range(4, 8))}
