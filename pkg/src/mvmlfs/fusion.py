"""Trace-based view weighting and the weighted concatenated fusion matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .datasets import MultiViewDataset
from .graph import knn_affinity, smoothness_trace

# Floor applied to degenerate smoothness traces before inversion.
TRACE_FLOOR = 1e-12


@dataclass(frozen=True)
class ViewWeights:
    """Non-negative per-view weights summing to 1, inversely proportional to
    each view's label-smoothness trace."""

    weights: np.ndarray
    traces: np.ndarray


@dataclass(frozen=True)
class FusionMatrix:
    """Horizontal concatenation of the views, block i scaled by weight i."""

    data: np.ndarray
    block_offsets: list[int]
    weights: ViewWeights

    def block(self, i: int) -> np.ndarray:
        lo = self.block_offsets[i]
        hi = self.block_offsets[i + 1] if i + 1 < len(self.block_offsets) else self.data.shape[1]
        return self.data[:, lo:hi]


def uniform_view_weights(n_views: int) -> ViewWeights:
    """All views weighted equally (ablation of the trace-based weighting)."""
    w = np.full(n_views, 1.0 / n_views)
    return ViewWeights(weights=w, traces=np.full(n_views, np.nan))


def compute_view_weights(ds: MultiViewDataset, q: int, sigma: float) -> ViewWeights:
    """Weight each view by the inverse of Tr(Y^T L_x Y) on that view's graph.

    A view whose neighborhood graph disagrees more with the labels (larger
    trace) receives a smaller weight.  Traces of zero are floored at a tiny
    constant so the inversion stays finite.
    """
    traces = np.empty(ds.n_views)
    for i, x in enumerate(ds.views):
        g = knn_affinity(x, q=q, sigma=sigma)
        traces[i] = smoothness_trace(g, ds.labels)
    inv = 1.0 / np.maximum(traces, TRACE_FLOOR)
    return ViewWeights(weights=inv / inv.sum(), traces=traces)


def build_fusion(ds: MultiViewDataset, w: ViewWeights) -> FusionMatrix:
    """Concatenate the views horizontally, scaling block i by weight i."""
    if len(w.weights) != ds.n_views:
        raise ValueError(
            f"{len(w.weights)} weights for {ds.n_views} views"
        )
    blocks = [wi * x for wi, x in zip(w.weights, ds.views)]
    offsets, pos = [], 0
    for x in ds.views:
        offsets.append(pos)
        pos += x.shape[1]
    return FusionMatrix(data=np.hstack(blocks), block_offsets=offsets, weights=w)


def save_view_weights_json(w: ViewWeights, view_names: list[str], path) -> None:
    with open(path, "w") as fh:
        json.dump({name: float(wi) for name, wi in zip(view_names, w.weights)},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
