"""Gaussian-kernel lifting of the label matrix and the reconstructed
global-view distribution built on top of it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .graph import GraphPair, knn_affinity


@dataclass(frozen=True)
class LabelKernel:
    """Pairwise Gaussian kernel over label rows, plus its augmented design.

    rho : (n, n) kernel matrix, exp(-||y_i - y_j||^2 / avg_pdist^2)
    avg_pdist : mean of the n(n-1)/2 pairwise (non-squared) label distances
    augmented : (n, n+1) matrix [rho, 1]; the trailing ones column absorbs
        the bias of any linear map applied on top of the kernel space
    """

    rho: np.ndarray
    avg_pdist: float
    augmented: np.ndarray


@dataclass(frozen=True)
class GlobalDistribution:
    """Reconstructed global-view D and its per-view blocks.

    Block i is ``augmented @ Wy_blocks[i]``; D is their horizontal
    concatenation, column-aligned with the fusion matrix.
    """

    D: np.ndarray
    blocks: list[np.ndarray]
    Wy_blocks: list[np.ndarray]


def label_kernel(Y: np.ndarray) -> LabelKernel:
    """Lift label rows into the pairwise Gaussian-kernel space.

    The bandwidth is the squared mean pairwise distance between distinct
    label rows; when every pair coincides the bandwidth falls back to 1.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    dists = pdist(Y, metric="euclidean")
    avg = float(dists.mean())
    if avg == 0.0:
        avg = 1.0
    rho = np.exp(-squareform(dists) ** 2 / avg**2)
    augmented = np.hstack([rho, np.ones((n, 1))])
    return LabelKernel(rho=rho, avg_pdist=avg, augmented=augmented)


def global_distribution(kernel: LabelKernel, Wy_blocks: list[np.ndarray]) -> GlobalDistribution:
    """Map the augmented kernel space through per-view coefficient blocks."""
    n_aug = kernel.augmented.shape[1]
    for i, wy in enumerate(Wy_blocks):
        if wy.shape[0] != n_aug:
            raise ValueError(
                f"coefficient block {i} has {wy.shape[0]} rows, expected {n_aug}"
            )
    blocks = [kernel.augmented @ wy for wy in Wy_blocks]
    return GlobalDistribution(D=np.hstack(blocks), blocks=blocks,
                              Wy_blocks=list(Wy_blocks))


def label_laplacian(Y: np.ndarray, q: int, sigma: float) -> GraphPair:
    """q-NN Gaussian graph over label rows; affinity and degrees are kept
    separately because the solver uses them on opposite sides of its update."""
    return knn_affinity(np.asarray(Y, dtype=float), q=q, sigma=sigma)


def save_kernel_csv(kernel: LabelKernel, path) -> None:
    """Dense CSV of the kernel matrix, for external heatmap plotting."""
    np.savetxt(path, kernel.rho, delimiter=",")


def save_distribution_csv(dist: GlobalDistribution, path) -> None:
    """Dense CSV of the reconstructed global-view matrix."""
    np.savetxt(path, dist.D, delimiter=",")
