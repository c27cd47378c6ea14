"""Genetic search over K-FLANN vigilance and tolerances.

A chromosome holds a binary control gene (one bit per feature), a real
coefficient gene (one tolerance per feature) and a vigilance slot. In control
gene mode the vigilance is the fraction of 1-bits; in direct mode it is evolved
as a real value snapped to the grid ``{1/d, ..., d/d}``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_positive_int, check_same_length, check_variant
from .data import Dataset, FeatureBounds, feature_bounds
from .kflann import KFLANN, ClusteringOutcome, KflannParams, cluster
from .validity import ValidityReport, evaluate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Chromosome:
    cong: np.ndarray
    coefg: np.ndarray
    vigilance: float

    @property
    def n_features(self) -> int:
        return self.cong.size

    def genes(self) -> np.ndarray:
        """Flat ``2d + 1`` solution vector: control bits, tolerances, vigilance."""
        return np.concatenate([self.cong.astype(float), self.coefg, [self.vigilance]])

    def key(self) -> Tuple:
        return (self.vigilance, self.coefg.tobytes())


@dataclass(frozen=True)
class GaConfig:
    popsize: int = 90
    generations: int = 20
    runs: int = 100
    cr: float = 0.7
    mu: float = 0.05
    a: float = 0.7
    b: float = 2.0
    seed: int = 0
    cong_mode: bool = True
    unsupervised: bool = False
    max_epochs: int = 50
    threads: int = 1
    target_k: Optional[int] = None
    free_k: bool = False

    def __post_init__(self):
        for name in ("popsize", "generations", "runs", "max_epochs", "threads"):
            check_positive_int(getattr(self, name), name)
        if self.popsize < 2 or self.popsize % 2:
            raise ValueError(f"popsize must be even and at least 2, got {self.popsize}")
        if not 0.0 < self.cr <= 1.0:
            raise ValueError(f"cr must lie in (0, 1], got {self.cr}")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"a must lie in [0, 1], got {self.a}")
        if self.b < 0:
            raise ValueError(f"b must be non-negative, got {self.b}")
        if self.target_k is not None:
            check_positive_int(self.target_k, "target_k")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class Individual:
    chromosome: Chromosome
    outcome: Optional[ClusteringOutcome]
    report: ValidityReport

    @property
    def fitness(self) -> float:
        return self.report.fitness

    def rank_key(self):
        """Sort key: higher fitness, then lower error, then fewer clusters."""
        err = self.report.error_rate
        err = math.inf if err != err else err
        return (-self.report.fitness, err, self.report.K)


# Encoding ----------------------------------------------------------------------


def _grid_snap(value: float, d: int) -> float:
    return min(d, max(1, round(value * d))) / d


def tolerance_limits(bounds: FeatureBounds) -> Tuple[np.ndarray, np.ndarray]:
    """Per-feature ``[mindist, maxdist/2]``, collapsed to ``mindist`` where inverted."""
    lo = np.asarray(bounds.lower, dtype=float)
    hi = np.asarray(bounds.upper, dtype=float)
    bad = lo > hi
    if np.any(bad):
        log.warning("tolerance range collapses to mindist for features %s", np.flatnonzero(bad).tolist())
        hi = np.where(bad, lo, hi)
    return lo, hi


def init_population(bounds: FeatureBounds, config: GaConfig, rng) -> List[Chromosome]:
    lo, hi = tolerance_limits(bounds)
    d = lo.size
    if d < 1:
        raise ValueError("bounds must cover at least one feature")
    pop = []
    for _ in range(config.popsize):
        cong = rng.integers(0, 2, size=d).astype(np.int8)
        while not cong.any():
            cong = rng.integers(0, 2, size=d).astype(np.int8)
        coefg = lo + rng.random(d) * (hi - lo)
        if config.cong_mode:
            vig = cong.sum() / d
        else:
            vig = _grid_snap(1.0 - rng.random(), d)
        pop.append(Chromosome(cong, coefg, vig))
    return pop


def decode(chromosome: Chromosome, variant: str = "enhanced", max_epochs: int = 50) -> KflannParams:
    if not chromosome.vigilance > 0:
        raise ValueError("vigilance slot is zero")
    return KflannParams(chromosome.vigilance, chromosome.coefg.copy(), variant, max_epochs)


def encode(params: KflannParams, cong=None) -> Chromosome:
    """Build a chromosome from parameters.

    Without an explicit control gene, the first ``round(vigilance * d)`` bits
    are set.
    """
    d = params.n_features
    if cong is None:
        ones = int(round(params.vigilance * d))
        cong = np.zeros(d, dtype=np.int8)
        cong[:ones] = 1
    return Chromosome(np.asarray(cong, dtype=np.int8), params.tolerances.copy(), params.vigilance)


# Operators ---------------------------------------------------------------------


def roulette_select(fitnesses: Sequence[float], n: int, rng) -> np.ndarray:
    """Sample ``n`` indices with replacement, proportionally to fitness."""
    f = np.asarray(fitnesses, dtype=float)
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise ValueError("fitness values must be finite and non-negative")
    total = f.sum()
    if total <= 0:
        log.warning("all fitness values are zero; selecting uniformly")
        return rng.integers(0, f.size, size=n)
    cumprob = np.cumsum(f / total)
    cumprob[-1] = 1.0
    # first member whose cumulative probability exceeds the draw
    idx = np.searchsorted(cumprob, rng.random(n), side="right")
    return np.minimum(idx, f.size - 1)


def uniform_crossover(p1, p2, rng, mask: float = 0.5):
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    check_same_length(p1, p2, "parents")
    take2 = rng.random(p1.size) < mask
    return np.where(take2, p2, p1), np.where(take2, p1, p2)


def arithmetic_crossover(p1, p2, a: float = 0.7):
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    check_same_length(p1, p2, "parents")
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    return a * p1 + (1 - a) * p2, (1 - a) * p1 + a * p2


def normal_mutation(cong, mu: float, rng) -> np.ndarray:
    """With probability ``mu`` flip one random bit; an all-zero result is undone."""
    out = np.array(cong, dtype=np.int8)
    if rng.random() < mu:
        pos = rng.integers(out.size)
        out[pos] = 1 - out[pos]
        if not out.any():
            out[pos] = 1
    return out


def nonuniform_mutation(coefg, bounds, G: int, MAXG: int, b: float, mu: float, rng) -> np.ndarray:
    """Per-gene non-uniform mutation whose step shrinks as ``G`` approaches ``MAXG``.

    ``bounds`` is a :class:`FeatureBounds` or an explicit ``(lower, upper)`` pair.
    """
    if G > MAXG:
        raise ValueError(f"generation {G} exceeds MAXG={MAXG}")
    lo, hi = tolerance_limits(bounds) if isinstance(bounds, FeatureBounds) else map(np.asarray, bounds)
    x = np.array(coefg, dtype=float)
    shrink = (1.0 - G / MAXG) ** b
    for i in range(x.size):
        if rng.random() >= mu:
            continue
        r = rng.random()
        if rng.random() < 0.5:
            x[i] = x[i] + r * (hi[i] - x[i]) * shrink
        else:
            x[i] = x[i] - r * (x[i] - lo[i]) * shrink
    return np.clip(x, lo, hi)


def elitism_replace(parents, offspring):
    """Survivor cascade over ``[(item, fitness), (item, fitness)]`` pairs.

    Offspring 1 replaces parent 1 if fitter, otherwise parent 2 if fitter; then
    offspring 2 replaces the (possibly updated) parent 2 if fitter, otherwise
    parent 1 if fitter.
    """
    p = list(parents)
    o1, o2 = offspring
    if o1[1] > p[0][1]:
        p[0] = o1
    elif o1[1] > p[1][1]:
        p[1] = o1
    if o2[1] > p[1][1]:
        p[1] = o2
    elif o2[1] > p[0][1]:
        p[0] = o2
    return p


# Evolution ---------------------------------------------------------------------


def resolve_target_k(dataset: Dataset, config: GaConfig) -> Optional[int]:
    """Cluster count an individual must produce to score, or None for no constraint.

    Defaults to the number of classes in the labels. Individuals with any other
    count get fitness 0, since the raw fitness rewards ever finer partitions.
    """
    if config.free_k:
        return None
    if config.target_k is not None:
        return config.target_k
    return dataset.n_classes or None


class Evaluator:
    """Cluster and score chromosomes, caching by (vigilance, tolerances)."""

    def __init__(self, dataset: Dataset, variant: str, config: GaConfig):
        self.dataset = dataset
        self.variant = variant
        self.config = config
        self.target_k = resolve_target_k(dataset, config)
        self._cache: Dict[Tuple, Tuple] = {}

    def __call__(self, chrom: Chromosome) -> Individual:
        key = chrom.key()
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = self._run(chrom)
        return Individual(chrom, *hit)

    def _run(self, chrom):
        ds = self.dataset
        try:
            out = cluster(ds, decode(chrom, self.variant, self.config.max_epochs))
            rep = evaluate(ds.patterns, out.assignments, out.centroids, ds.labels,
                           self.config.unsupervised)
            if self.target_k is not None and rep.K != self.target_k:
                rep = replace(rep, fitness=0.0)
        except Exception as exc:  # an unusable individual loses, the run goes on
            log.debug("evaluation failed: %s", exc)
            return None, ValidityReport(float("nan"), float("nan"), 0.0, 0, True)
        return out, rep

    def many(self, chroms: Sequence[Chromosome], pool=None) -> List[Individual]:
        if pool is None:
            return [self(c) for c in chroms]
        # evaluate distinct keys concurrently, then fill the cache serially
        todo = {}
        for c in chroms:
            if c.key() not in self._cache:
                todo.setdefault(c.key(), c)
        for key, res in zip(todo, pool.map(self._run, todo.values())):
            self._cache[key] = res
        return [self(c) for c in chroms]


@dataclass
class RunRecord:
    run: int
    best: Individual
    best_fitness_per_generation: List[float]
    final_population: List[Individual]

    @property
    def modal_k(self) -> int:
        ks = [ind.report.K for ind in self.final_population]
        vals, counts = np.unique(ks, return_counts=True)
        return int(vals[np.argmax(counts)])


@dataclass
class SearchResult:
    best: Individual
    runs: List[RunRecord]
    variant: str
    config: GaConfig


def _repair_cong(cong, rng):
    if not cong.any():
        cong = cong.copy()
        cong[rng.integers(cong.size)] = 1
    return cong


def _make_child(cong, coefg, vig, config, d):
    if config.cong_mode:
        vig = cong.sum() / d
    else:
        vig = _grid_snap(vig, d)
    return Chromosome(cong.astype(np.int8), coefg, vig)


def breed(p1: Chromosome, p2: Chromosome, G: int, bounds: FeatureBounds,
          config: GaConfig, rng) -> Tuple[Chromosome, Chromosome]:
    """Crossover (with probability ``cr``) then mutation of one parent pair."""
    d = p1.n_features
    lo, hi = tolerance_limits(bounds)
    if rng.random() < config.cr:
        c1, c2 = uniform_crossover(p1.cong, p2.cong, rng)
        t1, t2 = arithmetic_crossover(p1.coefg, p2.coefg, config.a)
        v1, v2 = arithmetic_crossover([p1.vigilance], [p2.vigilance], config.a)
        v1, v2 = float(v1[0]), float(v2[0])
    else:
        c1, c2, t1, t2 = p1.cong, p2.cong, p1.coefg, p2.coefg
        v1, v2 = p1.vigilance, p2.vigilance
    kids = []
    for c, t, v in ((c1, t1, v1), (c2, t2, v2)):
        c = normal_mutation(_repair_cong(np.asarray(c, dtype=np.int8), rng), config.mu, rng)
        t = nonuniform_mutation(np.clip(t, lo, hi), (lo, hi), G, config.generations,
                                config.b, config.mu, rng)
        if not config.cong_mode and rng.random() < config.mu:
            v = rng.integers(1, d + 1) / d
        kids.append(_make_child(c, t, v, config, d))
    return kids[0], kids[1]


def _best(inds: Sequence[Individual]) -> Individual:
    return min(inds, key=Individual.rank_key)


def evolve_run(evaluator: Evaluator, bounds: FeatureBounds, config: GaConfig, rng,
               run_id: int = 0, pool=None) -> RunRecord:
    """One independent run: a fresh population evolved for ``config.generations``."""
    pop = evaluator.many(init_population(bounds, config, rng), pool)
    best = _best(pop)
    history = [best.fitness]
    for G in range(config.generations):
        picks = roulette_select([ind.fitness for ind in pop], config.popsize, rng)
        pairs = [(pop[picks[i]], pop[picks[i + 1]]) for i in range(0, len(picks), 2)]
        children = []
        for a, b in pairs:
            children.extend(breed(a.chromosome, b.chromosome, G, bounds, config, rng))
        kids = evaluator.many(children, pool)
        new_pop = []
        for j, (a, b) in enumerate(pairs):
            k1, k2 = kids[2 * j], kids[2 * j + 1]
            survivors = elitism_replace([(a, a.fitness), (b, b.fitness)],
                                        [(k1, k1.fitness), (k2, k2.fitness)])
            new_pop.extend(ind for ind, _ in survivors)
        # the generation's best chromosome is always carried over
        prev_best = _best(pop)
        if _best(new_pop).rank_key() > prev_best.rank_key():
            worst = max(range(len(new_pop)), key=lambda i: new_pop[i].rank_key())
            new_pop[worst] = prev_best
        pop = new_pop
        gen_best = _best(pop)
        if gen_best.rank_key() < best.rank_key():
            best = gen_best
        history.append(best.fitness)
    return RunRecord(run_id, best, history, pop)


def evolve(dataset: Dataset, config: GaConfig, variant: str = "enhanced") -> SearchResult:
    """Run ``config.runs`` independent GA runs and return the overall best.

    Run ``r`` draws from its own stream spawned from ``config.seed``, so a run's
    result does not depend on how many runs are requested or on the variant.
    """
    check_variant(variant)
    if dataset.labels is None and not config.unsupervised:
        raise ValueError("dataset has no labels; enable unsupervised mode")
    bounds = feature_bounds(dataset)
    evaluator = Evaluator(dataset, variant, config)
    streams = np.random.SeedSequence(config.seed).spawn(config.runs)
    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        runs = [
            evolve_run(evaluator, bounds, config, np.random.default_rng(s), r, pool)
            for r, s in enumerate(streams)
        ]
    finally:
        if pool is not None:
            pool.shutdown()
    return SearchResult(_best([r.best for r in runs]), runs, variant, config)


class GAKFLANNSearch(BaseEstimator):
    """Genetic search for K-FLANN vigilance and tolerances.

    ``fit(X, y)`` evolves parameters scored against labels ``y`` (or without
    labels when ``unsupervised=True``) and refits a :class:`KFLANN` with the best
    ones as ``best_estimator_``.
    """

    def __init__(self, variant="enhanced", popsize=90, generations=20, runs=100,
                 cr=0.7, mu=0.05, a=0.7, b=2.0, cong_mode=True, unsupervised=False,
                 max_epochs=50, threads=1, random_state=0):
        self.variant = variant
        self.popsize = popsize
        self.generations = generations
        self.runs = runs
        self.cr = cr
        self.mu = mu
        self.a = a
        self.b = b
        self.cong_mode = cong_mode
        self.unsupervised = unsupervised
        self.max_epochs = max_epochs
        self.threads = threads
        self.random_state = random_state

    def _config(self):
        return GaConfig(self.popsize, self.generations, self.runs, self.cr, self.mu,
                        self.a, self.b, int(self.random_state), bool(self.cong_mode),
                        bool(self.unsupervised), self.max_epochs, self.threads)

    def fit(self, X, y=None):
        if y is None:
            X = check_array(X, dtype=float)
        else:
            X, y = check_X_y(X, y, dtype=float)
        self.n_features_in_ = X.shape[1]
        result = evolve(Dataset(X, y), self._config(), check_variant(self.variant))
        self.search_result_ = result
        best = result.best
        self.best_params_ = {
            "vigilance": best.chromosome.vigilance,
            "tolerances": best.chromosome.coefg.copy(),
        }
        self.best_score_ = best.fitness
        self.best_estimator_ = KFLANN(variant=self.variant, max_epochs=self.max_epochs,
                                      **self.best_params_).fit(X)
        self.labels_ = self.best_estimator_.labels_
        return self

    def predict(self, X):
        check_is_fitted(self, "best_estimator_")
        return self.best_estimator_.predict(X)

    def fit_predict(self, X, y=None):
        return self.fit(X, y).labels_
