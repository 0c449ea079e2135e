"""congroute - constant-congestion routing of edge-disjoint demand pairs."""

__version__ = "1.0.0"
