from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np
import pytest

from congroute.graph.models import MultiGraph


def grid_graph(rows: int, cols: int) -> MultiGraph:
    """rows x cols grid on vertices 0..rows*cols-1, edges in row-major order"""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return MultiGraph.from_edge_list(range(rows * cols), edges)


def cycle_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edge_list(range(n), [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edge_list(range(n), [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> MultiGraph:
    return MultiGraph.from_networkx(nx.complete_graph(n))


def random_regular(d: int, n: int, seed: int) -> MultiGraph:
    return MultiGraph.from_networkx(nx.random_regular_graph(d, n, seed=seed))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def grid4():
    return grid_graph(4, 4)


@pytest.fixture
def k8():
    return complete_graph(8)


def clique_barbell() -> MultiGraph:
    """Two K4 blocks {0..3}, {4..7} joined by edge 3-4; leaves 8..13 hang off 0,1,2 and 5,6,7"""
    edges = list(combinations(range(4), 2)) + list(combinations(range(4, 8), 2)) + [(3, 4)]
    edges += [(0, 8), (1, 9), (2, 10), (5, 11), (6, 12), (7, 13)]
    return MultiGraph.from_edge_list(range(14), edges)


def pendant_grid() -> MultiGraph:
    """3x3 grid (edges 0..11) with pendant terminals 9..16 on every vertex but the centre (edges 12..19)"""
    g = grid_graph(3, 3)
    edges = [g.endpoints(eid) for eid in g.edge_ids]
    owners = [0, 1, 2, 3, 5, 6, 7, 8]
    edges += [(v, 9 + i) for i, v in enumerate(owners)]
    return MultiGraph.from_edge_list(range(17), edges)


# small enough for γ=1 runs on pendant_grid
TOY_OVERRIDES = {"gamma": 1, "alpha": Fraction(1, 100), "k1": 4, "p": 1, "k_star": 2, "k_prime": 2}
