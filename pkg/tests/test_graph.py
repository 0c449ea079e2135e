import pytest

from conftest import grid_graph, path_graph
from congroute.errors import MalformedInputError
from congroute.graph.io import format_graph, parse_demands, parse_graph
from congroute.graph.models import MultiGraph, Path, PathSet, congestion


def test_edge_ids_follow_list_order():
    """Edge ids are positions in the edge list"""
    g = MultiGraph.from_edge_list(range(3), [(0, 1), (1, 2), (0, 1)])
    assert g.edge_ids == (0, 1, 2)
    assert g.endpoints(2) == (0, 1)
    assert g.degree(0) == 2
    assert g.neighbors(1) == [0, 2]


def test_self_loop_rejected():
    """Self-loops are malformed"""
    with pytest.raises(MalformedInputError):
        MultiGraph.from_edge_list(range(2), [(1, 1)])


def test_out_and_inner_edges(grid4):
    """Boundary of a corner vertex and of a 2x2 block"""
    assert grid4.out_edges({0}) == frozenset({0, 1})
    block = {0, 1, 4, 5}
    assert len(grid4.out_edges(block)) == 4
    assert len(grid4.inner_edges(block)) == 4


def test_contract_and_uncontract_keep_edge_ids(grid4):
    """Contraction drops inner edges, expansion restores every edge id"""
    contracted, cmap = grid4.contract_cluster({0, 1, 4, 5})
    assert contracted.num_vertices == 13
    assert contracted.num_edges == 20
    assert cmap.members == frozenset({0, 1, 4, 5})
    assert cmap.boundary == grid4.out_edges({0, 1, 4, 5})
    assert contracted.is_super(cmap.super_node)
    assert contracted.expand({cmap.super_node}) == cmap.members
    restored = contracted.uncontract({cmap.super_node})
    assert set(restored.edge_ids) == set(grid4.edge_ids)
    assert restored.num_vertices == 16


def test_components_sorted_by_smallest_vertex():
    """Two separate edges form two components"""
    g = MultiGraph.from_edge_list(range(4), [(2, 3), (0, 1)])
    assert g.components() == [frozenset({0, 1}), frozenset({2, 3})]
    assert not g.is_connected()


def test_bfs_path_respects_max_length(grid4):
    """Opposite corners of the 4x4 grid are 6 hops apart"""
    path = grid4.bfs_path(0, 15)
    assert len(path) == 6
    path.validate(grid4)
    assert grid4.bfs_path(0, 15, max_length=5) is None
    assert grid4.bfs_path(0, 15, usable=lambda e: False) is None


def test_shortcut_erases_loops(grid4):
    """A walk that backtracks over an edge becomes simple"""
    walk = Path((0, 1, 5, 1, 2), (0, 3, 3, 2))
    walk.validate(grid4)
    assert walk.shortcut() == Path((0, 1, 2), (0, 2))


def test_validate_rejects_wrong_endpoints(grid4):
    """Edge 0 joins 0 and 1, not 0 and 5"""
    with pytest.raises(MalformedInputError):
        Path((0, 5), (0,)).validate(grid4)


def test_path_needs_one_more_vertex_than_edges():
    """Vertex and edge sequences must alternate"""
    with pytest.raises(MalformedInputError):
        Path((0, 1), ())


def test_congestion_counts_shared_edges(grid4):
    """Three paths over edge 0 give congestion 3"""
    paths = [Path((0, 1), (0,)), Path((1, 0), (0,)), Path((0, 1, 2), (0, 2))]
    assert congestion(paths, grid4) == 3
    assert PathSet.of(paths).load()[2] == 1


def test_boundary_gadget_gives_private_stubs():
    """Each boundary edge of S hangs off its own fresh vertex"""
    g = path_graph(4)
    gadget, stub_of, real_of = g.boundary_gadget({1, 2})
    assert stub_of == {0: 4, 2: 5}
    assert real_of == {4: 0, 5: 3}
    assert gadget.endpoints(0) == (1, 4)
    assert gadget.vertices == frozenset({1, 2, 4, 5})


def test_concat_and_reverse():
    """Joining paths needs a shared end vertex"""
    g = grid_graph(1, 3)
    a, b = Path((0, 1), (0,)), Path((1, 2), (1,))
    joined = a.concat(b)
    joined.validate(g)
    assert joined.reversed() == Path((2, 1, 0), (1, 0))
    with pytest.raises(MalformedInputError):
        b.concat(a)


def test_parse_and_format_graph():
    """The text format lists the header and edges in id order"""
    g = parse_graph(["c comment", "p 3 2", "e 1 2", "e 2 3"])
    assert g.vertices == frozenset({1, 2, 3})
    assert dict(g.edges) == {0: (1, 2), 1: (2, 3)}
    assert format_graph(g) == "p 3 2\ne 1 2\ne 2 3\n"


@pytest.mark.parametrize(
    "lines",
    [
        ["p 3 1", "e 1 4"],
        ["p 3 2", "e 1 2"],
        ["e 1 2"],
        ["p 3 1", "x 1 2"],
        ["p 3 1", "e 2 2"],
    ],
)
def test_parse_graph_rejects_bad_input(lines):
    """Out-of-range endpoints, wrong counts, missing header, unknown records and loops"""
    with pytest.raises(MalformedInputError):
        parse_graph(lines)


def test_parse_demands():
    """Only 'd' records are read"""
    assert parse_demands(["p 4 0", "d 1 2", "d 3 4"]) == [(1, 2), (3, 4)]
    with pytest.raises(MalformedInputError):
        parse_demands(["d 1 1"])
