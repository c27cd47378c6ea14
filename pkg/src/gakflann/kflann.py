"""K-FLANN and enhanced K-FLANN clustering.

Patterns are presented one at a time. A pattern is matched against every
existing output node by counting the features that fall strictly inside the
node's per-feature tolerance; nodes whose matched fraction reaches the
vigilance are candidates. With no candidate a new node is created whose
weights are the pattern itself. After each epoch the cluster centroids are
computed; if they moved, the member nearest each centroid is moved to the
front of the presentation list, the network is rebuilt and another epoch runs.

The two variants differ only in how a winner is chosen among the candidates:
``original`` takes the nearest node, ``enhanced`` takes the node with the
highest match score and falls back to the nearest node among those sharing it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import (
    check_positive_int,
    check_tolerances,
    check_variant,
    check_vigilance,
)
from .data import Dataset

CENTROID_ATOL = 1e-9
DEFAULT_MAX_EPOCHS = 50


@dataclass(frozen=True)
class KflannParams:
    vigilance: float
    tolerances: np.ndarray
    variant: str = "enhanced"
    max_epochs: int = DEFAULT_MAX_EPOCHS

    def __post_init__(self):
        check_vigilance(self.vigilance)
        check_variant(self.variant)
        check_positive_int(self.max_epochs, "max_epochs")
        tol = np.asarray(self.tolerances, dtype=float).ravel()
        object.__setattr__(self, "tolerances", check_tolerances(tol, tol.size))

    @property
    def n_features(self) -> int:
        return self.tolerances.size

    def required_matches(self) -> int:
        """Smallest matched-feature count whose fraction reaches the vigilance."""
        return max(1, math.ceil(self.vigilance * self.n_features - 1e-9))


@dataclass
class Network:
    """Output layer: node weight vectors and the patterns each node owns."""

    nodes: List[np.ndarray] = field(default_factory=list)
    members: List[List[int]] = field(default_factory=list)

    def __len__(self):
        return len(self.nodes)

    def add_node(self, weights, first_member: int) -> int:
        self.nodes.append(np.array(weights, dtype=float))
        self.members.append([first_member])
        return len(self.nodes) - 1

    def assign(self, node: int, pattern_index: int) -> None:
        self.members[node].append(pattern_index)


@dataclass(frozen=True)
class ClusteringOutcome:
    assignments: np.ndarray
    centroids: np.ndarray
    epochs_run: int
    converged: bool
    order: np.ndarray

    @property
    def cluster_count(self) -> int:
        return self.centroids.shape[0]


# Matching and winner selection ---------------------------------------------


def match_score(weights, x, tolerances) -> float:
    """Fraction of features where ``(w - x)**2`` is strictly below ``tol**2``."""
    w = np.asarray(weights, dtype=float)
    x = np.asarray(x, dtype=float)
    tol = np.asarray(tolerances, dtype=float)
    if not (w.shape == x.shape == tol.shape) or w.ndim != 1 or w.size == 0:
        raise ValueError(
            f"dimension mismatch: weights {w.shape}, pattern {x.shape}, tolerances {tol.shape}"
        )
    return float(np.count_nonzero(tol**2 - (w - x) ** 2 > 0)) / w.size


def find_matches(network: Network, x, params: KflannParams) -> List[Tuple[int, float]]:
    """Nodes whose match score reaches the vigilance, as ``(node, score)`` pairs."""
    need = params.required_matches()
    d = params.n_features
    out = []
    for j, w in enumerate(network.nodes):
        s = match_score(w, x, params.tolerances)
        if round(s * d) >= need:
            out.append((j, s))
    return out


def _sq_dist(network, j, x):
    diff = network.nodes[j] - np.asarray(x, dtype=float)
    return float(diff @ diff)


def select_winner_original(matches: Sequence[Tuple[int, float]], x, network: Network) -> int:
    """Nearest matched node; ties go to the lowest node index."""
    if not matches:
        raise ValueError("no matched nodes to choose from")
    return min((_sq_dist(network, j, x), j) for j, _ in matches)[1]


def select_winner_enhanced(matches: Sequence[Tuple[int, float]], x, network: Network) -> int:
    """Highest-scoring matched node, nearest among those sharing the top score."""
    if not matches:
        raise ValueError("no matched nodes to choose from")
    top = max(s for _, s in matches)
    tied = [(j, s) for j, s in matches if s == top]
    if len(tied) == 1:
        return tied[0][0]
    return select_winner_original(tied, x, network)


_WINNER_RULES = {"original": select_winner_original, "enhanced": select_winner_enhanced}


def present_epoch(X: np.ndarray, order, params: KflannParams) -> Network:
    """One presentation pass over ``X`` in ``order``, starting from an empty network.

    Reference implementation of the per-pattern steps; :func:`cluster` uses a
    compiled kernel with the same semantics.
    """
    select = _WINNER_RULES[params.variant]
    net = Network()
    for i in order:
        x = X[i]
        matches = find_matches(net, x, params)
        if matches:
            net.assign(select(matches, x, net), int(i))
        else:
            net.add_node(x, int(i))
    return net


@njit(cache=True)
def _epoch_kernel(X, order, tol_sq, need, enhanced):
    n, d = X.shape
    W = np.empty((n, d))
    assign = np.empty(n, np.int64)
    k_nodes = 0
    for t in range(order.shape[0]):
        i = order[t]
        best = -1
        best_cnt = -1
        best_dist = np.inf
        for k in range(k_nodes):
            cnt = 0
            dist = 0.0
            for f in range(d):
                diff = W[k, f] - X[i, f]
                sq = diff * diff
                dist += sq
                if tol_sq[f] - sq > 0.0:
                    cnt += 1
            if cnt < need:
                continue
            if enhanced:
                if cnt > best_cnt or (cnt == best_cnt and dist < best_dist):
                    best, best_cnt, best_dist = k, cnt, dist
            elif dist < best_dist:
                best, best_dist = k, dist
        if best < 0:
            for f in range(d):
                W[k_nodes, f] = X[i, f]
            assign[i] = k_nodes
            k_nodes += 1
        else:
            assign[i] = best
    return assign, W[:k_nodes].copy()


def _epoch_fast(X, order, params):
    return _epoch_kernel(
        X,
        np.asarray(order, dtype=np.int64),
        params.tolerances**2,
        params.required_matches(),
        params.variant == "enhanced",
    )


# Centroids and the epoch loop ------------------------------------------------


def compute_centroids(network: Network, dataset) -> np.ndarray:
    """Mean of each node's member patterns, in node order."""
    X = dataset.patterns if isinstance(dataset, Dataset) else np.asarray(dataset, float)
    out = np.empty((len(network), X.shape[1]))
    for j, mem in enumerate(network.members):
        if not mem:
            raise ValueError(f"node {j} has no members")
        out[j] = X[mem].mean(axis=0)
    return out


def centroids_from_assignments(X: np.ndarray, assignments: np.ndarray, k: int) -> np.ndarray:
    return _centroid_kernel(X, np.asarray(assignments, dtype=np.int64), k)


@njit(cache=True)
def _centroid_kernel(X, assign, k):
    n, d = X.shape
    sums = np.zeros((k, d))
    counts = np.zeros(k)
    for i in range(n):
        c = assign[i]
        counts[c] += 1.0
        for f in range(d):
            sums[c, f] += X[i, f]
    for c in range(k):
        for f in range(d):
            sums[c, f] /= counts[c]
    return sums


@njit(cache=True)
def _seed_positions(X, order, assign, centroids):
    k, d = centroids.shape
    best_pos = np.full(k, -1, np.int64)
    best_d = np.full(k, np.inf)
    for pos in range(order.shape[0]):
        i = order[pos]
        c = assign[i]
        dist = 0.0
        for f in range(d):
            diff = X[i, f] - centroids[c, f]
            dist += diff * diff
        if dist < best_d[c]:
            best_d[c] = dist
            best_pos[c] = pos
    return best_pos


def reshuffle(X, order, assignments, centroids) -> np.ndarray:
    """Move each cluster's member nearest its centroid to the front, in node order.

    Distance ties go to the member presented earlier; the remaining patterns
    keep their relative order.
    """
    order = np.asarray(order, dtype=np.int64)
    best_pos = _seed_positions(np.asarray(X, dtype=float), order,
                               np.asarray(assignments, dtype=np.int64),
                               np.asarray(centroids, dtype=float))
    keep = np.ones(order.size, dtype=bool)
    keep[best_pos] = False
    return np.concatenate([order[best_pos], order[keep]])


def _as_matrix(data) -> np.ndarray:
    X = data.patterns if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot cluster an empty dataset")
    return X


def cluster(data, params: KflannParams, order=None, *, reference: bool = False) -> ClusteringOutcome:
    """Run epochs until the centroids stop moving or ``params.max_epochs`` is hit.

    ``data`` is a :class:`Dataset` or an ``(n, d)`` array. ``order`` is the
    initial presentation order (defaults to row order). The centroids of the
    first epoch are compared against the node weights they grew from, so an
    epoch in which every node ends exactly on its own weights converges
    immediately. Later epochs compare against the previous epoch's centroids and
    also require the cluster count to be unchanged.

    ``reference=True`` runs the pure-Python presentation pass for every
    epoch. The default path uses a compiled kernel and, because each epoch is
    a deterministic function of its presentation order, stops as soon as an
    order repeats and returns the state the epoch cap would have reached.
    Both paths give identical outcomes.
    """
    X = _as_matrix(data)
    if X.shape[1] != params.n_features:
        raise ValueError(
            f"dimension mismatch: dataset has d={X.shape[1]}, "
            f"parameters have {params.n_features} tolerances"
        )
    order = np.arange(X.shape[0]) if order is None else np.asarray(order, dtype=np.int64)
    if sorted(order.tolist()) != list(range(X.shape[0])):
        raise ValueError("order must be a permutation of the pattern indices")

    seen = {}
    history = []
    previous = None
    for epoch in range(1, params.max_epochs + 1):
        if reference:
            net = present_epoch(X, order, params)
            assign = np.empty(X.shape[0], dtype=np.int64)
            for j, mem in enumerate(net.members):
                assign[mem] = j
            weights = np.array(net.nodes)
        else:
            assign, weights = _epoch_fast(X, order, params)
        centroids = centroids_from_assignments(X, assign, weights.shape[0])
        if previous is None:
            previous = weights
        if previous.shape == centroids.shape and np.all(
            np.abs(previous - centroids) <= CENTROID_ATOL
        ):
            return ClusteringOutcome(assign, centroids, epoch, True, order)
        previous = centroids
        if not reference:
            key = order.tobytes()
            if key in seen:
                # epochs from here on replay seen[key]..epoch-1, none of which converged
                start = seen[key]
                period = epoch - start
                final = start + (params.max_epochs - start) % period
                a, c, o = history[final - 1]
                return ClusteringOutcome(a, c, params.max_epochs, False, o)
            seen[key] = epoch
            history.append((assign, centroids, order))
        if epoch < params.max_epochs:
            order = reshuffle(X, order, assign, centroids)
    return ClusteringOutcome(assign, centroids, params.max_epochs, False, order)


class KFLANN(ClusterMixin, BaseEstimator):
    """K-means fast learning artificial neural network clusterer.

    Parameters
    ----------
    vigilance : float, default=1.0
        Fraction of features that must fall within tolerance for a node to
        match, in (0, 1].
    tolerances : float or array-like of shape (n_features,)
        Per-feature maximum deviation between a pattern and a node weight.
        A scalar applies to all features.
    variant : {"enhanced", "original"}, default="enhanced"
        Winner rule among matched nodes.
    max_epochs : int, default=50
        Cap on presentation epochs.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    cluster_centers_ : ndarray of shape (n_clusters, n_features)
    n_clusters_ : int
    n_epochs_ : int
    converged_ : bool
    outcome_ : ClusteringOutcome
    """

    def __init__(self, vigilance=1.0, tolerances=None, variant="enhanced",
                 max_epochs=DEFAULT_MAX_EPOCHS):
        self.vigilance = vigilance
        self.tolerances = tolerances
        self.variant = variant
        self.max_epochs = max_epochs

    def _params(self, n_features):
        return KflannParams(
            check_vigilance(self.vigilance),
            check_tolerances(self.tolerances, n_features),
            check_variant(self.variant),
            check_positive_int(self.max_epochs, "max_epochs"),
        )

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        params = self._params(X.shape[1])
        out = cluster(X, params)
        self.outcome_ = out
        self.labels_ = out.assignments
        self.cluster_centers_ = out.centroids
        self.n_clusters_ = out.cluster_count
        self.n_epochs_ = out.epochs_run
        self.converged_ = out.converged
        return self

    def predict(self, X):
        """Assign patterns to the fitted centroids with the same match and winner rules.

        Patterns that match no centroid get label -1.
        """
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but KFLANN was fitted with {self.n_features_in_}"
            )
        params = self._params(X.shape[1])
        net = Network(list(self.cluster_centers_), [[] for _ in self.cluster_centers_])
        select = _WINNER_RULES[params.variant]
        labels = np.full(X.shape[0], -1, dtype=np.int64)
        for i, x in enumerate(X):
            matches = find_matches(net, x, params)
            if matches:
                labels[i] = select(matches, x, net)
        return labels
