"""Loading, validation, normalization and fold-splitting of multi-view multi-label data.

A dataset is described on disk by a JSON manifest::

    {
      "views": [
        {"name": "color", "path": "color.csv"},
        {"name": "texture", "path": "texture.csv"}
      ],
      "labels": "labels.csv"
    }

Relative paths are resolved against the manifest's directory.  Each CSV is
plain numeric, comma-separated, no header, one sample per row.  Label entries
must be exactly 0 or 1; anything else is rejected rather than thresholded.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Raised when a manifest or one of its CSV files is malformed."""


@dataclass(frozen=True)
class MultiViewDataset:
    """Per-view feature matrices plus one binary label matrix, row-aligned.

    views : list of (n, d_i) float arrays, one per view
    labels : (n, l) binary float array
    view_names : one name per view
    d_total : total feature count across views
    """

    views: list[np.ndarray]
    labels: np.ndarray
    view_names: list[str]
    d_total: int = field(init=False)

    def __post_init__(self):
        if not self.views:
            raise DatasetError("dataset needs at least one view")
        if len(self.views) != len(self.view_names):
            raise DatasetError("one name per view required")
        n = self.views[0].shape[0]
        if n < 2:
            raise DatasetError(f"need at least 2 samples, got {n}")
        for name, x in zip(self.view_names, self.views):
            if x.ndim != 2 or x.shape[0] != n:
                raise DatasetError(
                    f"view '{name}' has {x.shape[0]} rows, expected {n}"
                )
        if self.labels.ndim != 2 or self.labels.shape[0] != n:
            raise DatasetError(
                f"labels have {self.labels.shape[0]} rows, expected {n}"
            )
        bad = ~np.isin(self.labels, (0.0, 1.0))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise DatasetError(
                f"label entry at row {r}, column {c} is "
                f"{self.labels[r, c]!r}, expected 0 or 1"
            )
        object.__setattr__(self, "d_total", int(sum(x.shape[1] for x in self.views)))

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[0]

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_labels(self) -> int:
        return self.labels.shape[1]

    def stacked_features(self) -> np.ndarray:
        """All views concatenated horizontally, (n, d_total)."""
        return np.hstack(self.views)

    def subset(self, rows: np.ndarray) -> "MultiViewDataset":
        """Dataset restricted to the given sample rows (fold splitting)."""
        return MultiViewDataset(
            views=[x[rows] for x in self.views],
            labels=self.labels[rows],
            view_names=list(self.view_names),
        )


@dataclass(frozen=True)
class FoldAssignment:
    """Maps each sample index to a fold in [0, k)."""

    fold_of_sample: np.ndarray
    k: int
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_sample == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_sample != fold)


def _read_matrix_csv(path: Path) -> np.ndarray:
    """Read a numeric CSV; on failure point at the offending file/row/cell."""
    if not path.is_file():
        raise DatasetError(f"file not found: {path}")
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
        return data
    except ValueError:
        pass
    # Slow path only to produce a precise diagnostic.
    width = None
    with open(path, newline="") as fh:
        for r, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DatasetError(
                    f"{path}: row {r} has {len(row)} columns, expected {width}"
                )
            for c, cell in enumerate(row):
                try:
                    float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-numeric cell {cell!r} at row {r}, column {c}"
                    ) from None
    raise DatasetError(f"{path}: could not be parsed as a numeric CSV")


def load_dataset(manifest_path) -> MultiViewDataset:
    """Load views and labels per the JSON manifest and validate alignment."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise DatasetError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{manifest_path}: invalid JSON ({exc})") from None

    views_spec = manifest.get("views")
    labels_spec = manifest.get("labels")
    if not isinstance(views_spec, list) or not views_spec:
        raise DatasetError(f"{manifest_path}: 'views' must be a non-empty list")
    if not isinstance(labels_spec, str):
        raise DatasetError(f"{manifest_path}: 'labels' must be a path string")

    base = manifest_path.parent
    names, views = [], []
    for entry in views_spec:
        if not isinstance(entry, dict) or "name" not in entry or "path" not in entry:
            raise DatasetError(
                f"{manifest_path}: each view needs 'name' and 'path' keys"
            )
        names.append(str(entry["name"]))
        views.append(_read_matrix_csv(base / entry["path"]))
    if len(set(names)) != len(names):
        raise DatasetError(f"{manifest_path}: duplicate view names")

    labels_path = base / labels_spec
    labels = _read_matrix_csv(labels_path)

    n = views[0].shape[0]
    for name, entry, x in zip(names, views_spec, views):
        if x.shape[0] != n:
            raise DatasetError(
                f"{base / entry['path']}: view '{name}' has {x.shape[0]} rows, "
                f"view '{names[0]}' has {n}"
            )
    if labels.shape[0] != n:
        raise DatasetError(
            f"{labels_path}: labels have {labels.shape[0]} rows, views have {n}"
        )
    bad = ~np.isin(labels, (0.0, 1.0))
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise DatasetError(
            f"{labels_path}: non-binary label {labels[r, c]!r} at row {r}, column {c}"
        )
    return MultiViewDataset(views=views, labels=labels, view_names=names)


def normalize_views(ds: MultiViewDataset) -> MultiViewDataset:
    """Min-max scale every feature column to [0, 1]; labels untouched.

    Constant columns map to all zeros. Idempotent: applying twice equals once.
    """
    scaled = []
    for x in ds.views:
        lo = x.min(axis=0)
        hi = x.max(axis=0)
        span = hi - lo
        out = np.zeros_like(x, dtype=float)
        keep = span > 0
        out[:, keep] = (x[:, keep] - lo[keep]) / span[keep]
        scaled.append(out)
    return MultiViewDataset(views=scaled, labels=ds.labels.copy(),
                            view_names=list(ds.view_names))


def kfold_split(n: int, k: int, seed: int) -> FoldAssignment:
    """Seeded round-robin assignment of a random permutation to k folds.

    Fold sizes differ by at most one; deterministic for a fixed seed.
    """
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if n < k:
        raise ValueError(f"cannot split {n} samples into {k} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    fold_of_sample = np.empty(n, dtype=int)
    fold_of_sample[perm] = np.arange(n) % k
    return FoldAssignment(fold_of_sample=fold_of_sample, k=k, seed=seed)


def save_folds_csv(folds: FoldAssignment, path) -> None:
    """Write the assignment as ``sample_index,fold`` rows."""
    with open(path, "w", newline="") as fh:
        fh.write("sample_index,fold\n")
        for i, f in enumerate(folds.fold_of_sample):
            fh.write(f"{i},{f}\n")
