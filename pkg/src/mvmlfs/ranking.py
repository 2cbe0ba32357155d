"""Feature ordering by row norms of the learned weight matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import ModelState


@dataclass(frozen=True)
class FeatureRanking:
    """Permutation of global feature indices by descending score.

    scores[j] is the l2 norm of row j of the vertically stacked per-view
    weight blocks; view_of_feature maps a global index back to its view.
    """

    order: np.ndarray
    scores: np.ndarray
    view_of_feature: np.ndarray


def rank_features(state: ModelState) -> FeatureRanking:
    """Score each feature by its weight-row norm, ties going to the lower index."""
    W = state.stacked_W()
    scores = np.linalg.norm(W, axis=1)
    # argsort is ascending and stable, so sorting the negated scores keeps
    # equal-scored features in index order.
    order = np.argsort(-scores, kind="stable")
    view_of_feature = np.concatenate(
        [np.full(w.shape[0], i, dtype=int) for i, w in enumerate(state.W_blocks)]
    )
    return FeatureRanking(order=order, scores=scores,
                          view_of_feature=view_of_feature)


def select_top_percent(r: FeatureRanking, p: float) -> np.ndarray:
    """First max(1, floor(p% of d_total)) feature indices of the ranking."""
    if not 0 < p <= 100:
        raise ValueError(f"percentage p={p} must lie in (0, 100]")
    d_total = len(r.order)
    count = max(1, int(np.floor(p * d_total / 100.0)))
    return r.order[:count].copy()


def save_ranking_csv(r: FeatureRanking, path) -> None:
    """Write ``rank,global_index,view,within_view_index,score`` rows."""
    # Within-view index = global index minus the view's starting offset.
    starts = {}
    offset = 0
    for v in np.unique(r.view_of_feature):
        starts[int(v)] = offset
        offset += int(np.sum(r.view_of_feature == v))
    with open(path, "w", newline="") as fh:
        fh.write("rank,global_index,view,within_view_index,score\n")
        for rank, j in enumerate(r.order):
            v = int(r.view_of_feature[j])
            fh.write(f"{rank},{j},{v},{int(j) - starts[v]},{r.scores[j]!r}\n")
