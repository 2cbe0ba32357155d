"""Downstream evaluation: ML-KNN classifier, multi-label metrics, and the
cross-validated feature-percentage sweep.

Rank-based metrics resolve score ties by average rank, and samples whose
true label row is all-zero or all-one are skipped for the rank metrics
(their denominators are undefined) while still counting toward hamming loss.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

from .datasets import MultiViewDataset, kfold_split
from .ranking import rank_features, select_top_percent
from .solver import Hyperparams, fit

METRIC_NAMES = ("ap", "coverage", "hamming_loss", "ranking_loss")


@dataclass(frozen=True)
class MlknnModel:
    """Bayesian k-NN multi-label classifier with Laplace smoothing.

    priors[j] is P(label j present); posterior tables give P(count of
    positive neighbors | label present/absent) for counts 0..k.  Training
    points and labels are retained for neighbor queries at predict time.
    """

    k: int
    s: float
    priors: np.ndarray
    post_present: np.ndarray
    post_absent: np.ndarray
    train_points: np.ndarray
    train_labels: np.ndarray


@dataclass(frozen=True)
class MetricsReport:
    ap: float
    coverage: float
    hamming_loss: float
    ranking_loss: float
    n_eval: int
    p_percent: float = math.nan


@dataclass(frozen=True)
class SweepResult:
    """Per-(fold, percentage) reports plus the over-folds summary.

    summary maps each metric name to (mean, sample std) of the per-fold
    values, where a fold's value is the mean over the percentage sweep.
    """

    records: list[MetricsReport]
    fold_ids: list[int]
    fold_means: dict[str, np.ndarray]
    summary: dict[str, tuple[float, float]]


def _knn_indices(query: np.ndarray, reference: np.ndarray, k: int,
                 exclude_self: bool = False) -> np.ndarray:
    """Indices of the k nearest reference rows for each query row.

    Ties broken by ascending reference index; with exclude_self the i-th
    query is assumed to be the i-th reference row and skips itself.
    """
    dists = cdist(query, reference)
    if exclude_self:
        np.fill_diagonal(dists, np.inf)
    order = np.argsort(dists, axis=1, kind="stable")
    return order[:, :k]


def mlknn_train(Xtr: np.ndarray, Ytr: np.ndarray, k: int = 10,
                s: float = 1.0) -> MlknnModel:
    """Estimate priors and neighbor-count posteriors from the training set.

    Each training sample's neighborhood excludes the sample itself.
    """
    Xtr = np.asarray(Xtr, dtype=float)
    Ytr = np.asarray(Ytr, dtype=float)
    n, l = Ytr.shape
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the training size {n}")
    if s <= 0:
        raise ValueError(f"smoothing s={s} must be positive")

    priors = (s + Ytr.sum(axis=0)) / (2.0 * s + n)

    neighbors = _knn_indices(Xtr, Xtr, k, exclude_self=True)
    counts = Ytr[neighbors].sum(axis=1).astype(int)      # (n, l)

    c_present = np.zeros((l, k + 1))
    c_absent = np.zeros((l, k + 1))
    for j in range(l):
        present = Ytr[:, j] == 1
        c_present[j] = np.bincount(counts[present, j], minlength=k + 1)
        c_absent[j] = np.bincount(counts[~present, j], minlength=k + 1)

    post_present = (s + c_present) / (s * (k + 1) + c_present.sum(axis=1, keepdims=True))
    post_absent = (s + c_absent) / (s * (k + 1) + c_absent.sum(axis=1, keepdims=True))
    return MlknnModel(k=k, s=s, priors=priors, post_present=post_present,
                      post_absent=post_absent, train_points=Xtr,
                      train_labels=Ytr)


def mlknn_predict(model: MlknnModel, Xte: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior scores and MAP bipartition for each test sample.

    The score is the normalized posterior of label presence given the count
    of positive training neighbors; the bipartition predicts presence when
    that hypothesis is at least as likely as absence.
    """
    Xte = np.asarray(Xte, dtype=float)
    if Xte.shape[1] != model.train_points.shape[1]:
        raise ValueError(
            f"test features {Xte.shape[1]} != training features "
            f"{model.train_points.shape[1]}"
        )
    neighbors = _knn_indices(Xte, model.train_points, model.k)
    counts = model.train_labels[neighbors].sum(axis=1).astype(int)   # (n_te, l)

    l = model.train_labels.shape[1]
    cols = np.arange(l)
    p1 = model.priors[None, :] * model.post_present[cols, counts]
    p0 = (1.0 - model.priors)[None, :] * model.post_absent[cols, counts]
    scores = p1 / (p1 + p0)
    bipartition = (p1 >= p0).astype(float)
    return scores, bipartition


def _descending_midranks(s: np.ndarray) -> np.ndarray:
    """Rank of each entry when sorted by descending value, ties averaged."""
    greater = (s[None, :] > s[:, None]).sum(axis=1)
    equal = (s[None, :] == s[:, None]).sum(axis=1)
    return greater + (equal + 1) / 2.0


def compute_metrics(scores: np.ndarray, bipartition: np.ndarray,
                    Ytrue: np.ndarray, p_percent: float = math.nan) -> MetricsReport:
    """Average precision, coverage, hamming loss and ranking loss.

    Coverage is normalized by the label count so it lies in [0, 1].  When no
    sample row is eligible for the rank metrics they are reported as 0.
    """
    scores = np.asarray(scores, dtype=float)
    bipartition = np.asarray(bipartition, dtype=float)
    Ytrue = np.asarray(Ytrue, dtype=float)
    if scores.shape != Ytrue.shape or bipartition.shape != Ytrue.shape:
        raise ValueError(
            f"shape mismatch: scores {scores.shape}, bipartition "
            f"{bipartition.shape}, labels {Ytrue.shape}"
        )
    n, l = Ytrue.shape
    hamming = float(np.mean(bipartition != Ytrue))

    ap_vals, cov_vals, rl_vals = [], [], []
    for i in range(n):
        relevant = Ytrue[i] == 1
        n_rel = int(relevant.sum())
        if n_rel == 0 or n_rel == l:
            continue
        ranks = _descending_midranks(scores[i])
        rel_ranks = ranks[relevant]
        ap_vals.append(float(np.mean(
            [(rel_ranks <= r).sum() / r for r in rel_ranks]
        )))
        cov_vals.append((rel_ranks.max() - 1.0) / l)
        s_rel = scores[i][relevant][:, None]
        s_irr = scores[i][~relevant][None, :]
        viol = (s_irr > s_rel) + 0.5 * (s_irr == s_rel)
        rl_vals.append(float(viol.sum()) / (n_rel * (l - n_rel)))

    def agg(vals):
        return float(np.mean(vals)) if vals else 0.0

    return MetricsReport(ap=agg(ap_vals), coverage=agg(cov_vals),
                         hamming_loss=hamming, ranking_loss=agg(rl_vals),
                         n_eval=n, p_percent=p_percent)


def _evaluate_fold(ds: MultiViewDataset, hp: Hyperparams, train_rows: np.ndarray,
                   test_rows: np.ndarray, p_range, mlknn_k: int,
                   mlknn_s: float) -> list[MetricsReport]:
    """Fit on the training rows, then sweep feature percentages on the fold."""
    train_ds = ds.subset(train_rows)
    state, _ = fit(train_ds, hp)
    ranking = rank_features(state)

    Xtr = train_ds.stacked_features()
    Xte = ds.subset(test_rows).stacked_features()
    Yte = ds.labels[test_rows]

    reports = []
    for p in p_range:
        sel = select_top_percent(ranking, p)
        model = mlknn_train(Xtr[:, sel], train_ds.labels, k=mlknn_k, s=mlknn_s)
        scores, bipart = mlknn_predict(model, Xte[:, sel])
        reports.append(compute_metrics(scores, bipart, Yte, p_percent=float(p)))
    return reports


def cross_validated_sweep(ds: MultiViewDataset, hp: Hyperparams,
                          k_folds: int = 5, p_range=tuple(range(1, 21)),
                          mlknn_k: int = 10, mlknn_s: float = 1.0,
                          jobs: int = 1) -> SweepResult:
    """k-fold protocol: fit and rank inside each training split, evaluate
    selected subsets on the held-out fold, average over the percentage sweep.

    Feature selection never sees the test fold.  Folds are independent and
    may run in a worker pool; results are reduced in fold order either way.
    """
    p_range = list(p_range)
    if not p_range:
        raise ValueError("p_range must be non-empty")
    folds = kfold_split(ds.n_samples, k_folds, hp.seed)
    args = [(ds, hp, folds.train_indices(f), folds.test_indices(f),
             p_range, mlknn_k, mlknn_s) for f in range(k_folds)]

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_fold = list(pool.map(_evaluate_fold_star, args))
    else:
        per_fold = [_evaluate_fold(*a) for a in args]

    records, fold_ids = [], []
    for f, reports in enumerate(per_fold):
        records.extend(reports)
        fold_ids.extend([f] * len(reports))

    fold_means = {
        name: np.array([
            np.mean([getattr(r, name) for r in reports]) for reports in per_fold
        ])
        for name in METRIC_NAMES
    }
    summary = {
        name: (float(vals.mean()), float(vals.std(ddof=1)) if k_folds > 1 else 0.0)
        for name, vals in fold_means.items()
    }
    return SweepResult(records=records, fold_ids=fold_ids,
                       fold_means=fold_means, summary=summary)


def _evaluate_fold_star(args):
    return _evaluate_fold(*args)


def save_results_csv(result: SweepResult, path) -> None:
    """Write ``fold,p_percent,ap,coverage,hl,rl`` rows."""
    with open(path, "w", newline="") as fh:
        fh.write("fold,p_percent,ap,coverage,hl,rl\n")
        for f, r in zip(result.fold_ids, result.records):
            fh.write(f"{f},{r.p_percent!r},{r.ap!r},{r.coverage!r},"
                     f"{r.hamming_loss!r},{r.ranking_loss!r}\n")


def save_summary_json(result: SweepResult, path) -> None:
    payload = {
        name: {"mean": mean, "std": std}
        for name, (mean, std) in result.summary.items()
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
