# cuts/spectral.py - Fiedler-vector vertex orders for sweep cuts
import logging
from typing import List

import numpy as np
from scipy.sparse import coo_matrix, diags, identity
from scipy.sparse.linalg import eigsh

from congroute.graph.models import MultiGraph, VertexId

logger = logging.getLogger(__name__)

DENSE_LIMIT = 400


def fiedler_order(g: MultiGraph) -> List[VertexId]:
    """Vertices sorted by the second eigenvector of the normalized Laplacian.

    Ties (and the sign ambiguity of the eigenvector) are resolved so the
    order is reproducible: the vector is flipped to make its first
    non-negligible entry positive, and equal entries fall back to vertex id.
    """
    order = g.sorted_vertices()
    n = len(order)
    if n <= 2:
        return order
    index = {v: i for i, v in enumerate(order)}
    rows, cols = [], []
    for u, v in g.edges.values():
        rows.extend((index[u], index[v]))
        cols.extend((index[v], index[u]))
    adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    degree = np.asarray(adjacency.sum(axis=1)).reshape(-1)
    inv_sqrt = 1.0 / np.sqrt(np.where(degree > 0, degree, 1.0))
    laplacian = identity(n, format="csr") - diags(inv_sqrt) @ adjacency @ diags(inv_sqrt)

    if n <= DENSE_LIMIT:
        _values, vectors = np.linalg.eigh(laplacian.toarray())
        fiedler = vectors[:, 1]
    else:
        _values, vectors = eigsh(laplacian, k=2, which="SA", v0=np.ones(n))
        fiedler = vectors[:, np.argsort(_values)[1]]

    embedding = np.round(fiedler * inv_sqrt, 12)
    nonzero = np.flatnonzero(np.abs(embedding) > 1e-9)
    if len(nonzero) and embedding[nonzero[0]] < 0:
        embedding = -embedding
    ranked = sorted(range(n), key=lambda i: (embedding[i], order[i]))
    return [order[i] for i in ranked]
