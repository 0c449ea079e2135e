from congroute.graph.models import (
    ContractionMap,
    EdgeId,
    EdgeSubset,
    MultiGraph,
    Path,
    PathSet,
    VertexId,
    VertexSubset,
    congestion,
    contract_cluster,
    out_edges,
)

__all__ = [
    "ContractionMap",
    "EdgeId",
    "EdgeSubset",
    "MultiGraph",
    "Path",
    "PathSet",
    "VertexId",
    "VertexSubset",
    "congestion",
    "contract_cluster",
    "out_edges",
]
