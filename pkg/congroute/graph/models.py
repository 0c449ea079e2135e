# graph/models.py - Multigraph substrate, paths and congestion accounting
from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from congroute.errors import MalformedInputError

logger = logging.getLogger(__name__)

VertexId = int
EdgeId = int
VertexSubset = FrozenSet[VertexId]
EdgeSubset = FrozenSet[EdgeId]


@dataclass(frozen=True)
class ContractionMap:
    """Result of contracting a cluster: the super-node, its original members and out(c)"""

    super_node: VertexId
    members: VertexSubset
    boundary: EdgeSubset


class MultiGraph:
    """Immutable undirected multigraph with stable edge ids.

    A graph produced by contraction remembers the uncontracted graph it came
    from (``base``) and, for every base vertex, the vertex that currently
    represents it (``owner``). Contraction and expansion recompute the edge
    map from the base, so edge ids never change.
    """

    __slots__ = ("_vertices", "_edges", "_incident", "_clusters", "_base", "_owner", "_next_vertex")

    def __init__(
        self,
        vertices: Iterable[VertexId],
        edges: Mapping[EdgeId, Tuple[VertexId, VertexId]],
        clusters: Optional[Mapping[VertexId, VertexSubset]] = None,
        base: Optional["MultiGraph"] = None,
        owner: Optional[Mapping[VertexId, VertexId]] = None,
        next_vertex: Optional[int] = None,
    ):
        vertex_set = frozenset(vertices)
        incident: Dict[VertexId, List[EdgeId]] = {v: [] for v in vertex_set}
        for eid, (u, v) in edges.items():
            if u == v:
                raise MalformedInputError(f"edge {eid} is a self-loop on vertex {u}")
            if u not in incident or v not in incident:
                raise MalformedInputError(f"edge {eid} has an endpoint outside the vertex set")
            incident[u].append(eid)
            incident[v].append(eid)
        self._vertices = vertex_set
        self._edges = MappingProxyType({eid: (u, v) for eid, (u, v) in sorted(edges.items())})
        self._incident = MappingProxyType({v: tuple(sorted(es)) for v, es in incident.items()})
        self._clusters = MappingProxyType(dict(clusters or {}))
        self._base = base
        self._owner = MappingProxyType(dict(owner)) if owner is not None else None
        if next_vertex is None:
            known = list(vertex_set) + ([base._next_vertex] if base is not None else [])
            next_vertex = max(known) + 1 if known else 0
        self._next_vertex = next_vertex

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edge_list(cls, vertices: Iterable[VertexId], edge_list: Iterable[Tuple[VertexId, VertexId]]) -> "MultiGraph":
        """Build a base graph; edge ids follow list order starting at 0"""
        return cls(vertices, {eid: (u, v) for eid, (u, v) in enumerate(edge_list)})

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "MultiGraph":
        if graph.is_multigraph():
            edges = {eid: (u, v) for eid, (u, v, _key) in enumerate(sorted(graph.edges(keys=True)))}
        else:
            edges = {eid: (u, v) for eid, (u, v) in enumerate(sorted(tuple(sorted(e)) for e in graph.edges()))}
        return cls(graph.nodes(), edges)

    # -- basic queries ------------------------------------------------------

    @property
    def vertices(self) -> VertexSubset:
        return self._vertices

    @property
    def edges(self) -> Mapping[EdgeId, Tuple[VertexId, VertexId]]:
        return self._edges

    @property
    def edge_ids(self) -> Tuple[EdgeId, ...]:
        return tuple(self._edges)

    @property
    def num_vertices(self) -> int:
        return len(self._vertices)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def next_vertex(self) -> int:
        return self._next_vertex

    def sorted_vertices(self) -> List[VertexId]:
        return sorted(self._vertices)

    def endpoints(self, eid: EdgeId) -> Tuple[VertexId, VertexId]:
        try:
            return self._edges[eid]
        except KeyError:
            raise MalformedInputError(f"unknown edge id {eid}") from None

    def other_end(self, eid: EdgeId, v: VertexId) -> VertexId:
        a, b = self.endpoints(eid)
        if v == a:
            return b
        if v == b:
            return a
        raise MalformedInputError(f"vertex {v} is not an endpoint of edge {eid}")

    def incident(self, v: VertexId) -> Tuple[EdgeId, ...]:
        try:
            return self._incident[v]
        except KeyError:
            raise MalformedInputError(f"unknown vertex id {v}") from None

    def degree(self, v: VertexId) -> int:
        return len(self.incident(v))

    def max_degree(self) -> int:
        return max((len(es) for es in self._incident.values()), default=0)

    def neighbors(self, v: VertexId) -> List[VertexId]:
        return sorted({self.other_end(e, v) for e in self.incident(v)})

    def has_vertex(self, v: VertexId) -> bool:
        return v in self._vertices

    def has_edge(self, eid: EdgeId) -> bool:
        return eid in self._edges

    def check_vertices(self, s: Iterable[VertexId]) -> VertexSubset:
        subset = frozenset(s)
        unknown = subset - self._vertices
        if unknown:
            raise MalformedInputError(f"unknown vertex ids {sorted(unknown)[:5]}")
        return subset

    def check_edges(self, e: Iterable[EdgeId]) -> EdgeSubset:
        subset = frozenset(e)
        unknown = [eid for eid in subset if eid not in self._edges]
        if unknown:
            raise MalformedInputError(f"unknown edge ids {sorted(unknown)[:5]}")
        return subset

    # -- cuts ---------------------------------------------------------------

    def out_edges(self, s: Iterable[VertexId]) -> EdgeSubset:
        subset = self.check_vertices(s)
        boundary = set()
        for v in subset:
            for eid in self._incident[v]:
                if self.other_end(eid, v) not in subset:
                    boundary.add(eid)
        return frozenset(boundary)

    def inner_edges(self, s: Iterable[VertexId]) -> EdgeSubset:
        subset = self.check_vertices(s)
        return frozenset(
            eid for v in subset for eid in self._incident[v] if self.other_end(eid, v) in subset
        )

    def edges_between(self, x: Iterable[VertexId], y: Iterable[VertexId]) -> EdgeSubset:
        xs, ys = self.check_vertices(x), self.check_vertices(y)
        return frozenset(eid for v in xs for eid in self._incident[v] if self.other_end(eid, v) in ys)

    def inner_endpoint(self, eid: EdgeId, s: VertexSubset) -> VertexId:
        """Endpoint of a boundary edge that lies in s"""
        a, b = self.endpoints(eid)
        if a in s and b not in s:
            return a
        if b in s and a not in s:
            return b
        raise MalformedInputError(f"edge {eid} is not a boundary edge of the given set")

    # -- clusters -----------------------------------------------------------

    @property
    def base(self) -> "MultiGraph":
        return self._base if self._base is not None else self

    @property
    def clusters(self) -> Mapping[VertexId, VertexSubset]:
        return self._clusters

    @property
    def owner(self) -> Mapping[VertexId, VertexId]:
        if self._owner is not None:
            return self._owner
        return MappingProxyType({v: v for v in self._vertices})

    def is_super(self, v: VertexId) -> bool:
        return v in self._clusters

    def members(self, v: VertexId) -> VertexSubset:
        """Base vertices represented by v"""
        if v in self._clusters:
            return self._clusters[v]
        self.check_vertices((v,))
        return frozenset((v,))

    def expand(self, s: Iterable[VertexId]) -> VertexSubset:
        out: set = set()
        for v in s:
            out |= self.members(v)
        return frozenset(out)

    def _rebuild(self, owner: Dict[VertexId, VertexId], clusters: Dict[VertexId, VertexSubset], next_vertex: int) -> "MultiGraph":
        base = self.base
        edges = {}
        for eid, (u, v) in base.edges.items():
            ou, ov = owner[u], owner[v]
            if ou != ov:
                edges[eid] = (ou, ov)
        return MultiGraph(set(owner.values()), edges, clusters, base, owner, next_vertex)

    def contract_cluster(self, c: Iterable[VertexId]) -> Tuple["MultiGraph", ContractionMap]:
        cluster = self.check_vertices(c)
        if not cluster:
            raise MalformedInputError("cannot contract an empty cluster")
        boundary = self.out_edges(cluster)
        if len(cluster) == 1:
            (v,) = cluster
            return self, ContractionMap(v, self.members(v), boundary)
        members = self.expand(cluster)
        node = self._next_vertex
        owner = dict(self.owner)
        for m in members:
            owner[m] = node
        clusters = {v: ms for v, ms in self._clusters.items() if v not in cluster}
        clusters[node] = members
        graph = self._rebuild(owner, clusters, node + 1)
        return graph, ContractionMap(node, members, boundary)

    def uncontract(self, nodes: Iterable[VertexId]) -> "MultiGraph":
        """Replace the given super-nodes by their member vertices"""
        targets = [v for v in nodes if v in self._clusters]
        if not targets:
            return self
        owner = dict(self.owner)
        clusters = dict(self._clusters)
        for v in targets:
            for m in clusters.pop(v):
                owner[m] = m
        return self._rebuild(owner, clusters, self._next_vertex)

    def super_node_of(self, base_vertex: VertexId) -> VertexId:
        return self.owner[base_vertex]

    # -- derived graphs -----------------------------------------------------

    def induced(self, s: Iterable[VertexId]) -> "MultiGraph":
        subset = self.check_vertices(s)
        return MultiGraph(subset, {eid: self._edges[eid] for eid in self.inner_edges(subset)})

    def with_boundary(self, s: Iterable[VertexId]) -> "MultiGraph":
        """G[S] together with out(S) and the outer endpoints of those edges"""
        subset = self.check_vertices(s)
        eids = self.inner_edges(subset) | self.out_edges(subset)
        vertices = set(subset)
        for eid in eids:
            vertices.update(self._edges[eid])
        return MultiGraph(vertices, {eid: self._edges[eid] for eid in eids})

    def boundary_gadget(self, s: Iterable[VertexId]) -> Tuple["MultiGraph", Dict[EdgeId, VertexId], Dict[VertexId, VertexId]]:
        """G[S] with every edge of out(S) hanging off its own private stub vertex.

        Returns the graph, the stub of each boundary edge, and the real
        outer vertex behind each stub.
        """
        subset = self.check_vertices(s)
        edges = {eid: self._edges[eid] for eid in self.inner_edges(subset)}
        stub_of: Dict[EdgeId, VertexId] = {}
        real_of: Dict[VertexId, VertexId] = {}
        fresh = self._next_vertex
        for eid in sorted(self.out_edges(subset)):
            inner = self.inner_endpoint(eid, subset)
            stub_of[eid] = fresh
            real_of[fresh] = self.other_end(eid, inner)
            edges[eid] = (inner, fresh)
            fresh += 1
        return MultiGraph(set(subset) | set(real_of), edges, next_vertex=fresh), stub_of, real_of

    def subdivide(self, eids: Iterable[EdgeId]) -> Tuple["MultiGraph", Dict[EdgeId, VertexId], Dict[EdgeId, EdgeId]]:
        """Subdivide each given edge with a fresh vertex.

        Returns the graph, the subdivision vertex of each edge, and the host
        edge of every half edge.
        """
        chosen = sorted(self.check_edges(eids))
        edges = dict(self._edges)
        mid_of: Dict[EdgeId, VertexId] = {}
        host_of: Dict[EdgeId, EdgeId] = {eid: eid for eid in edges}
        fresh_vertex = self._next_vertex
        fresh_edge = max(edges, default=-1) + 1
        for eid in chosen:
            u, v = edges.pop(eid)
            del host_of[eid]
            mid_of[eid] = fresh_vertex
            edges[fresh_edge] = (u, fresh_vertex)
            edges[fresh_edge + 1] = (fresh_vertex, v)
            host_of[fresh_edge] = eid
            host_of[fresh_edge + 1] = eid
            fresh_vertex += 1
            fresh_edge += 2
        graph = MultiGraph(set(self._vertices) | set(mid_of.values()), edges, next_vertex=fresh_vertex)
        return graph, mid_of, host_of

    def without_vertices(self, s: Iterable[VertexId]) -> "MultiGraph":
        removed = frozenset(s)
        keep = self._vertices - removed
        edges = {eid: (u, v) for eid, (u, v) in self._edges.items() if u in keep and v in keep}
        return MultiGraph(keep, edges, next_vertex=self._next_vertex)

    def edge_subgraph(self, eids: Iterable[EdgeId]) -> "MultiGraph":
        chosen = self.check_edges(eids)
        vertices = set()
        for eid in chosen:
            vertices.update(self._edges[eid])
        return MultiGraph(vertices, {eid: self._edges[eid] for eid in chosen}, next_vertex=self._next_vertex)

    # -- traversal ----------------------------------------------------------

    def to_networkx(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(sorted(self._vertices))
        for eid, (u, v) in self._edges.items():
            graph.add_edge(u, v, key=eid)
        return graph

    def components(self) -> List[VertexSubset]:
        comps = [frozenset(c) for c in nx.connected_components(self.to_networkx())]
        return sorted(comps, key=min)

    def is_connected(self) -> bool:
        return self.num_vertices > 0 and len(self.components()) == 1

    def bfs_path(
        self,
        source: VertexId,
        target: VertexId,
        usable: Optional[Callable[[EdgeId], bool]] = None,
        max_length: Optional[int] = None,
    ) -> Optional["Path"]:
        """Shortest path by hop count, scanning incident edges in id order"""
        self.check_vertices((source, target))
        if source == target:
            return Path((source,), ())
        parent: Dict[VertexId, Tuple[VertexId, EdgeId]] = {}
        depth = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if max_length is not None and depth[u] >= max_length:
                continue
            for eid in self._incident[u]:
                if usable is not None and not usable(eid):
                    continue
                w = self.other_end(eid, u)
                if w in depth:
                    continue
                depth[w] = depth[u] + 1
                parent[w] = (u, eid)
                if w == target:
                    return _trace(parent, source, target)
                queue.append(w)
        return None

    def spanning_tree_edges(self, root: Optional[VertexId] = None) -> Dict[VertexId, Tuple[VertexId, EdgeId]]:
        """Deterministic BFS tree: child -> (parent, edge)"""
        if root is None:
            root = min(self._vertices)
        parent: Dict[VertexId, Tuple[VertexId, EdgeId]] = {}
        seen = {root}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for eid in self._incident[u]:
                w = self.other_end(eid, u)
                if w not in seen:
                    seen.add(w)
                    parent[w] = (u, eid)
                    queue.append(w)
        return parent

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.num_vertices}, m={self.num_edges}, clusters={len(self._clusters)})"


def _trace(parent: Mapping[VertexId, Tuple[VertexId, EdgeId]], source: VertexId, target: VertexId) -> "Path":
    vertices = [target]
    edges: List[EdgeId] = []
    node = target
    while node != source:
        prev, eid = parent[node]
        edges.append(eid)
        vertices.append(prev)
        node = prev
    return Path(tuple(reversed(vertices)), tuple(reversed(edges)))


@dataclass(frozen=True)
class Path:
    """Alternating vertex/edge sequence; a walk, not necessarily simple"""

    vertices: Tuple[VertexId, ...]
    edges: Tuple[EdgeId, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise MalformedInputError("path needs exactly one more vertex than edges")

    @property
    def source(self) -> VertexId:
        return self.vertices[0]

    @property
    def target(self) -> VertexId:
        return self.vertices[-1]

    @property
    def first_edge(self) -> Optional[EdgeId]:
        return self.edges[0] if self.edges else None

    @property
    def last_edge(self) -> Optional[EdgeId]:
        return self.edges[-1] if self.edges else None

    def __len__(self) -> int:
        return len(self.edges)

    def validate(self, g: MultiGraph) -> None:
        for i, eid in enumerate(self.edges):
            if not g.has_edge(eid):
                raise MalformedInputError(f"path uses unknown edge {eid}")
            if {self.vertices[i], self.vertices[i + 1]} != set(g.endpoints(eid)):
                raise MalformedInputError(
                    f"edge {eid} does not join {self.vertices[i]} and {self.vertices[i + 1]}"
                )

    def reversed(self) -> "Path":
        return Path(tuple(reversed(self.vertices)), tuple(reversed(self.edges)))

    def concat(self, other: "Path") -> "Path":
        if self.target != other.source:
            raise MalformedInputError(f"cannot join path ending at {self.target} to path starting at {other.source}")
        return Path(self.vertices + other.vertices[1:], self.edges + other.edges)

    def shortcut(self) -> "Path":
        """Loop erasure: the result is simple and uses a subset of the edges"""
        vertices: List[VertexId] = [self.vertices[0]]
        edges: List[EdgeId] = []
        position = {self.vertices[0]: 0}
        for eid, v in zip(self.edges, self.vertices[1:]):
            if v in position:
                cut = position[v]
                for dropped in vertices[cut + 1:]:
                    del position[dropped]
                vertices = vertices[: cut + 1]
                edges = edges[:cut]
                continue
            position[v] = len(vertices)
            vertices.append(v)
            edges.append(eid)
        return Path(tuple(vertices), tuple(edges))

    def map(self, vertex_map: Callable[[VertexId], VertexId]) -> "Path":
        return Path(tuple(vertex_map(v) for v in self.vertices), self.edges)


@dataclass(frozen=True)
class PathSet:
    paths: Tuple[Path, ...] = ()

    @classmethod
    def of(cls, paths: Iterable[Path]) -> "PathSet":
        return cls(tuple(paths))

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)

    def __getitem__(self, index: int) -> Path:
        return self.paths[index]

    def load(self) -> Counter:
        counts: Counter = Counter()
        for path in self.paths:
            counts.update(path.edges)
        return counts

    def congestion(self) -> int:
        return max(self.load().values(), default=0)

    def union(self, other: "PathSet") -> "PathSet":
        return PathSet(self.paths + other.paths)

    def validate(self, g: MultiGraph) -> None:
        for path in self.paths:
            path.validate(g)


def congestion(paths: Sequence[Path] | PathSet, g: Optional[MultiGraph] = None) -> int:
    """Maximum number of paths sharing one edge; validates against g when given"""
    path_set = paths if isinstance(paths, PathSet) else PathSet.of(paths)
    if g is not None:
        path_set.validate(g)
    return path_set.congestion()


def out_edges(g: MultiGraph, s: Iterable[VertexId]) -> EdgeSubset:
    return g.out_edges(s)


def contract_cluster(g: MultiGraph, c: Iterable[VertexId]) -> Tuple[MultiGraph, ContractionMap]:
    return g.contract_cluster(c)


__all__ = [
    "VertexId",
    "EdgeId",
    "VertexSubset",
    "EdgeSubset",
    "ContractionMap",
    "MultiGraph",
    "Path",
    "PathSet",
    "congestion",
    "out_edges",
    "contract_cluster",
]
