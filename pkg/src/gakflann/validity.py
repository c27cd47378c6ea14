"""Clustering quality: CS measure, majority-class error rate and GA fitness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit
from scipy.spatial.distance import pdist, squareform

EPS = 2e-6


class DegeneratePartition(ValueError):
    """The CS measure is undefined for this partition (K < 2 or coincident centroids)."""


@dataclass(frozen=True)
class ValidityReport:
    cs: float
    error_rate: float
    fitness: float
    K: int
    degenerate: bool = False


@njit(cache=True)
def _scatter_sum(X, members, starts):
    # sum over clusters of the mean (over members) of the farthest co-member distance
    k = starts.shape[0] - 1
    d = X.shape[1]
    total = 0.0
    for c in range(k):
        lo = starts[c]
        hi = starts[c + 1]
        acc = 0.0
        for a in range(lo, hi):
            i = members[a]
            far = 0.0
            for b in range(lo, hi):
                j = members[b]
                s = 0.0
                for f in range(d):
                    diff = X[i, f] - X[j, f]
                    s += diff * diff
                if s > far:
                    far = s
            acc += np.sqrt(far)
        total += acc / (hi - lo)
    return total


def cs_measure(X, assignments, centroids) -> float:
    """Summed mean intra-cluster maximum distance over summed nearest-centroid distance."""
    X = np.asarray(X, dtype=float)
    assignments = np.asarray(assignments, dtype=np.int64)
    centroids = np.asarray(centroids, dtype=float)
    k = centroids.shape[0]
    if k < 2:
        raise DegeneratePartition(f"CS measure needs at least 2 clusters, got {k}")
    counts = np.bincount(assignments, minlength=k)
    if counts.size > k or np.any(counts == 0):
        raise DegeneratePartition("assignments and centroids disagree or a cluster is empty")
    members = np.argsort(assignments, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)])
    numer = _scatter_sum(X, members, starts)
    cd = squareform(pdist(centroids))
    np.fill_diagonal(cd, np.inf)
    denom = cd.min(axis=1).sum()
    if denom <= 0.0:
        raise DegeneratePartition("all centroids coincide")
    return float(numer / denom)


def error_rate(assignments, labels) -> float:
    """Percentage of patterns outside their cluster's majority class.

    Majority ties go to the smaller class id, which does not change the count.
    """
    if labels is None:
        raise ValueError("error rate needs class labels")
    a = np.asarray(assignments)
    y = np.asarray(labels)
    if a.shape != y.shape:
        raise ValueError(f"{a.size} assignments for {y.size} labels")
    if a.size == 0:
        return 0.0
    _, y_dense = np.unique(y, return_inverse=True)
    _, a_dense = np.unique(a, return_inverse=True)
    table = np.zeros((a_dense.max() + 1, y_dense.max() + 1), dtype=int)
    np.add.at(table, (a_dense, y_dense), 1)
    wrong = a.size - table.max(axis=1).sum()
    return 100.0 * wrong / a.size


def fitness(cs: float, error: float) -> float:
    return 1.0 / (cs * error + EPS)


def evaluate(X, assignments, centroids, labels=None, unsupervised: bool = False) -> ValidityReport:
    """Score one clustering.

    Partitions with a single cluster (or coincident centroids) get fitness 0 and
    are flagged degenerate. In unsupervised mode the error term is replaced by 1.
    """
    k = np.asarray(centroids).shape[0]
    err = float("nan") if labels is None else error_rate(assignments, labels)
    if labels is None and not unsupervised:
        raise ValueError("labels are required unless unsupervised mode is on")
    try:
        cs = cs_measure(X, assignments, centroids)
    except DegeneratePartition:
        return ValidityReport(float("nan"), err, 0.0, k, True)
    return ValidityReport(cs, err, fitness(cs, 1.0 if unsupervised else err), k)
