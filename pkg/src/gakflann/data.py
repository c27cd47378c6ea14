"""Dataset containers, CSV ingestion, synthetic generators and feature statistics."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


@dataclass(frozen=True)
class Dataset:
    """Ordered patterns with optional integer class labels.

    ``patterns`` is an ``(n, d)`` float array; ``labels`` is ``(n,)`` ints or None.
    """

    patterns: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "dataset"

    def __post_init__(self):
        X = np.asarray(self.patterns, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1) if X.size else X.reshape(0, 0)
        if X.ndim != 2:
            raise DataError(f"patterns must be 2-D, got shape {X.shape}")
        if X.shape[0] and X.shape[1] < 1:
            raise DataError("patterns need at least one feature")
        if not np.all(np.isfinite(X)):
            raise DataError("patterns contain non-finite values")
        object.__setattr__(self, "patterns", X)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (X.shape[0],):
                raise DataError(
                    f"label count {y.size} does not match pattern count {X.shape[0]}"
                )
            object.__setattr__(self, "labels", y.astype(int))

    @property
    def n_patterns(self) -> int:
        return self.patterns.shape[0]

    @property
    def n_features(self) -> int:
        return self.patterns.shape[1]

    @property
    def n_classes(self) -> int:
        return 0 if self.labels is None else len(np.unique(self.labels))


@dataclass(frozen=True)
class FeatureBounds:
    mindist: np.ndarray
    maxdist: np.ndarray

    @property
    def lower(self) -> np.ndarray:
        """Lower limit of the tolerance search interval."""
        return self.mindist

    @property
    def upper(self) -> np.ndarray:
        """Upper limit of the tolerance search interval (half the feature range)."""
        return self.maxdist / 2.0


@dataclass(frozen=True)
class ClusterDef:
    center: tuple
    std: tuple
    count: int


@dataclass(frozen=True)
class SyntheticSpec:
    clusters: tuple
    seed: int = 0
    name: str = "synthetic"
    description: str = ""

    @property
    def n_features(self) -> int:
        return len(self.clusters[0].center) if self.clusters else 0


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, has_labels: bool = True, name: Optional[str] = None) -> Dataset:
    """Load a comma-separated dataset, one pattern per row.

    A first row containing any non-numeric cell is treated as a header. When
    ``has_labels`` is set the last column holds class labels; integer labels are
    kept as-is and anything else is mapped to dense integers in order of first
    appearance.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DataError(f"{path}: no such file")
    with open(path, newline="") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh)) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    first = [c.strip() for c in rows[0][1]]
    if not all(_is_number(c) for c in first):
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: header but no data rows")

    width = len(rows[0][1])
    n_feat = width - (1 if has_labels else 0)
    if n_feat < 1:
        raise DataError(f"{path}: row {rows[0][0]} has no feature columns")

    X = np.empty((len(rows), n_feat))
    raw_labels = []
    for r, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{path}: ragged rows, row {lineno} has {len(row)} columns, expected {width}"
            )
        for c in range(n_feat):
            cell = row[c].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at row {lineno}, column {c + 1}"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite value at row {lineno}, column {c + 1}")
            X[r, c] = v
        if has_labels:
            raw_labels.append(row[-1].strip())

    labels = encode_labels(raw_labels) if has_labels else None
    return Dataset(X, labels, name or os.path.splitext(os.path.basename(path))[0])


def encode_labels(raw: Sequence[str]) -> np.ndarray:
    """Integer labels pass through; other strings map to 0, 1, ... by first appearance."""
    try:
        ints = [int(s) for s in raw]
    except ValueError:
        ints = None
    if ints is not None:
        return np.asarray(ints, dtype=int)
    mapping: dict = {}
    return np.asarray([mapping.setdefault(s, len(mapping)) for s in raw], dtype=int)


def write_csv(dataset: Dataset, path) -> None:
    """Write patterns (and labels as the last column) with round-trip float formatting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i, row in enumerate(dataset.patterns):
            cells = [repr(float(v)) for v in row]
            if dataset.labels is not None:
                cells.append(str(int(dataset.labels[i])))
            w.writerow(cells)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Draw axis-aligned Gaussian clusters; labels are the generating cluster indices."""
    if not spec.clusters:
        raise DataError("synthetic spec has no clusters")
    d = spec.n_features
    if d < 1:
        raise DataError("synthetic spec is zero-dimensional")
    rng = np.random.default_rng(spec.seed)
    blocks, labels = [], []
    for k, c in enumerate(spec.clusters):
        center = np.asarray(c.center, dtype=float)
        std = np.broadcast_to(np.asarray(c.std, dtype=float), (d,))
        if center.shape != (d,):
            raise DataError(f"cluster {k} center has dimension {center.size}, expected {d}")
        if c.count < 1:
            raise DataError(f"cluster {k} has count {c.count}")
        if np.any(std < 0):
            raise DataError(f"cluster {k} has a negative standard deviation")
        blocks.append(center + rng.standard_normal((c.count, d)) * std)
        labels.append(np.full(c.count, k, dtype=int))
    return Dataset(np.vstack(blocks), np.concatenate(labels), spec.name)


def feature_bounds(dataset: Dataset) -> FeatureBounds:
    X = dataset.patterns
    if X.shape[0] == 0:
        raise DataError("feature_bounds needs a non-empty dataset")
    maxdist = X.max(axis=0) - X.min(axis=0)
    mindist = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        gaps = np.diff(np.unique(X[:, j]))
        mindist[j] = gaps.min() if gaps.size else 0.0
    return FeatureBounds(mindist, maxdist)


def distance_matrix(dataset: Dataset) -> np.ndarray:
    """Pairwise Euclidean distances, shape ``(n, n)``."""
    X = dataset.patterns
    if X.shape[0] == 0:
        raise DataError("distance_matrix needs a non-empty dataset")
    if X.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(X))


def write_matrix(matrix: np.ndarray, path) -> None:
    np.savetxt(path, matrix, delimiter=",", fmt="%.17g")


# Built-in benchmark data ---------------------------------------------------


def load_builtin(name: str) -> Dataset:
    """Load a bundled benchmark by name: ``iris``, ``wine`` or a synthetic preset."""
    key = name.lower()
    if key in ("iris", "wine"):
        from sklearn import datasets as skd

        loader = skd.load_iris if key == "iris" else skd.load_wine
        X, y = loader(return_X_y=True)
        return Dataset(X, y, key)
    if key in PRESETS:
        return generate_synthetic(PRESETS[key])
    raise DataError(f"unknown dataset {name!r}; known: iris, wine, {', '.join(PRESETS)}")


def _spec(name, description, clusters, seed):
    return SyntheticSpec(
        tuple(ClusterDef(tuple(c), tuple(s), n) for c, s, n in clusters), seed, name, description
    )


_ALT8 = (1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0)

# Separations are stated in units of the shared per-axis standard deviation.
PRESETS = {
    "syndata1": _spec(
        "syndata1",
        "2 well-separated clusters, 12 sigma apart on x",
        [((0.0, 0.0), (1.5, 0.6), 500), ((18.0, 1.0), (1.5, 0.6), 500)],
        seed=1,
    ),
    "syndata2": _spec(
        "syndata2",
        "2 half-separated clusters, 4.6 sigma apart on x",
        [((0.0, 0.0), (1.5, 0.6), 500), ((6.9, 0.0), (1.5, 0.6), 500)],
        seed=2,
    ),
    "syndata3": _spec(
        "syndata3",
        "2 overlapped clusters, 1.1 sigma apart on x (Bayes error about 29%)",
        [((0.0, 0.0), (1.5, 0.6), 500), ((1.65, 0.0), (1.5, 0.6), 500)],
        seed=3,
    ),
    "syndata4": _spec(
        "syndata4",
        "3 well-separated 8-D clusters, 7 sigma offsets on every feature",
        [
            ((0.0,) * 8, (1.0,) * 8, 250),
            ((7.0,) * 8, (1.0,) * 8, 150),
            (tuple(7.0 * v for v in _ALT8), (1.0,) * 8, 100),
        ],
        seed=4,
    ),
    "syndata5": _spec(
        "syndata5",
        "3 well-separated 8-D clusters, 7 sigma offsets on every feature",
        [
            ((0.0,) * 8, (1.0,) * 8, 150),
            ((-7.0,) * 8, (1.0,) * 8, 150),
            (tuple(-7.0 * v for v in _ALT8), (1.0,) * 8, 100),
        ],
        seed=5,
    ),
    "syndata6": _spec(
        "syndata6",
        "3 overlapped 8-D clusters, centers 1.5 sigma apart on separate axes",
        [
            ((0.0,) * 8, (1.0,) * 8, 100),
            ((1.5, 0, 0, 0, 0, 0, 0, 0), (1.0,) * 8, 150),
            ((0, 1.5, 0, 0, 0, 0, 0, 0), (1.0,) * 8, 100),
        ],
        seed=6,
    ),
    # Gaussian stand-in for the UCI New Thyroid data (not redistributable here):
    # approximate per-class means and spreads of T3-resin uptake, total
    # thyroxin, total triiodothyronine, TSH and max TSH difference.
    "newthyroid": _spec(
        "newthyroid",
        "New Thyroid analog: 215 x 5, classes normal 150 / hyper 35 / hypo 30",
        [
            ((109.6, 9.8, 1.7, 1.3, 2.5), (8.4, 1.9, 0.5, 0.8, 3.0), 150),
            ((95.3, 17.6, 4.3, 1.0, -0.1), (11.0, 4.7, 2.5, 0.3, 1.0), 35),
            ((122.1, 3.5, 1.1, 13.7, 14.3), (12.0, 2.1, 0.5, 13.0, 13.0), 30),
        ],
        seed=7,
    ),
}
