"""q-nearest-neighbor Gaussian affinity graphs and their Laplacians.

Affinity between samples i and j is ``exp(-||x_i - x_j||^2 / sigma^2)`` when
either point lies in the other's q-neighborhood, zero otherwise.  The
Laplacian is the unnormalized ``L = A - S`` with A the diagonal degree matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import squareform, pdist


@dataclass(frozen=True)
class GraphPair:
    """Affinity matrix S, its degree diagonal, and the Laplacian L = A - S.

    degrees holds the diagonal of the degree matrix A (row sums of S).
    """

    affinity: np.ndarray
    degrees: np.ndarray
    laplacian: np.ndarray
    sigma: float
    q: int


def knn_affinity(points: np.ndarray, q: int, sigma: float) -> GraphPair:
    """Build the symmetric q-NN Gaussian affinity graph over the rows of points.

    Neighborhoods use exact Euclidean distance, ties broken by ascending
    sample index; a point never counts among its own neighbors, so the
    affinity diagonal is zero.  The OR rule makes the graph symmetric: an
    edge exists when i is among j's q nearest or vice versa.
    """
    points = np.asarray(points, dtype=float)
    m = points.shape[0]
    if m < 2:
        raise ValueError(f"need at least 2 points, got {m}")
    if not 1 <= q < m:
        raise ValueError(f"neighbor count q={q} must satisfy 1 <= q < m={m}")
    if sigma <= 0:
        raise ValueError(f"bandwidth sigma={sigma} must be positive")

    sq_dist = squareform(pdist(points, metric="sqeuclidean"))
    ranked = sq_dist.copy()
    np.fill_diagonal(ranked, np.inf)
    # Stable sort keeps the lower index first among equidistant points.
    order = np.argsort(ranked, axis=1, kind="stable")
    neighbor = np.zeros((m, m), dtype=bool)
    rows = np.repeat(np.arange(m), q)
    neighbor[rows, order[:, :q].ravel()] = True
    neighbor |= neighbor.T

    affinity = np.where(neighbor, np.exp(-sq_dist / sigma**2), 0.0)
    np.fill_diagonal(affinity, 0.0)
    degrees = affinity.sum(axis=1)
    laplacian = np.diag(degrees) - affinity
    return GraphPair(affinity=affinity, degrees=degrees, laplacian=laplacian,
                     sigma=float(sigma), q=int(q))


def smoothness_trace(graph: GraphPair, Y: np.ndarray) -> float:
    """Tr(Y^T L Y): total affinity-weighted disagreement between sample rows.

    Equals one half of the double sum of s_ij * ||y_i - y_j||^2 over all
    ordered pairs.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != graph.laplacian.shape[0]:
        raise ValueError(
            f"Y has {Y.shape[0]} rows, graph has {graph.laplacian.shape[0]}"
        )
    return float(np.sum(Y * (graph.laplacian @ Y)))


def save_affinity_csv(graph: GraphPair, path) -> None:
    """Dump nonzero affinities as ``i,j,s_ij`` triplets."""
    ii, jj = np.nonzero(graph.affinity)
    with open(path, "w", newline="") as fh:
        fh.write("i,j,s_ij\n")
        for i, j in zip(ii, jj):
            fh.write(f"{i},{j},{graph.affinity[i, j]!r}\n")
