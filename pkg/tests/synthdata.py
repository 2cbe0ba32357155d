"""Synthetic dataset generators shared across the test suite."""

import json

import numpy as np

from mvmlfs import MultiViewDataset, normalize_views


def make_random_instance(seed: int) -> MultiViewDataset:
    """Small random two-view instance (n <= 50, d_total <= 30, l <= 5)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 51))
    d1 = int(rng.integers(4, 16))
    d2 = int(rng.integers(4, 31 - d1))
    l = int(rng.integers(2, 6))
    views = [rng.random((n, d1)), rng.random((n, d2))]
    labels = (rng.random((n, l)) < 0.4).astype(float)
    ds = MultiViewDataset(views=views, labels=labels, view_names=["a", "b"])
    return normalize_views(ds)


def make_planted_dataset(seed: int, n: int = 100, view_dims=(20, 20),
                         n_planted: int = 8, n_labels: int = 4):
    """Two-view dataset whose labels are a thresholded non-negative linear
    function of a known subset of features; everything else is noise.

    Returns the normalized dataset and the sorted global indices of the
    planted features.
    """
    rng = np.random.default_rng(seed)
    d_total = sum(view_dims)
    planted = np.sort(rng.choice(d_total, size=n_planted, replace=False))
    X = rng.random((n, d_total))
    mixing = rng.uniform(0.5, 1.5, size=(n_planted, n_labels))
    signal = X[:, planted] @ mixing
    labels = (signal > np.median(signal, axis=0)).astype(float)
    views, pos = [], 0
    for d in view_dims:
        views.append(X[:, pos:pos + d])
        pos += d
    ds = MultiViewDataset(views=views, labels=labels,
                          view_names=[f"view{i}" for i in range(len(view_dims))])
    return normalize_views(ds), planted


def write_manifest(dirpath, views, labels, names=None):
    """Write view/label CSVs plus their manifest; returns the manifest path."""
    names = names or [f"view{i}" for i in range(len(views))]
    entries = []
    for name, x in zip(names, views):
        path = dirpath / f"{name}.csv"
        np.savetxt(path, np.asarray(x), delimiter=",")
        entries.append({"name": name, "path": path.name})
    labels_path = dirpath / "labels.csv"
    np.savetxt(labels_path, np.asarray(labels), delimiter=",", fmt="%d")
    manifest = dirpath / "manifest.json"
    manifest.write_text(json.dumps({"views": entries, "labels": labels_path.name}))
    return manifest
