"""Planted-model recovery study: can the search find a known rule list?

Each replicate plants a rule list drawn from a pool of single-feature
candidate rules, simulates data from it, hands the search the same pool, and
records the edit distance between the recovered list and the planted one.
Averaging the distance per sample size traces out the recovery curve, which
should fall toward zero as data grows.
"""

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ._util import cell_rng, default_jobs
from .anneal import AnnealConfig, ModelScorer, anneal
from .errors import ConfigError
from .ingest import Dataset
from .mining import Rule
from .model import LatentParams, simulate_outcomes
from .rulelist import RuleList, assign_subgroups, edit_distance, subgroup_counts


@dataclass(frozen=True)
class RecoveryConfig:
    sizes: tuple
    n_replicates: int = 10
    n_steps: int = 1500
    temperature: float = 1.0
    # lists are built from scratch here, so an empty start spends the whole
    # step budget on construction instead of first cleaning a random init
    init_length: int = 0
    pool_size: int = 100
    n_true_rules: int = 5
    n_confounders: int = 10
    feature_rate: float = 0.25
    gap_scale: float = 10.0  # planted gaps are U(0, gap_scale) in every block
    noise_precision: float = 1.0
    min_block_share: float = 0.02  # every planted block must hold this share
    max_redraws: int = 1000

    def __post_init__(self):
        if not self.sizes:
            raise ConfigError("need at least one sample size")
        if any(int(n) < 1 for n in self.sizes):
            raise ConfigError(f"sample sizes must be positive, got {self.sizes}")
        if self.n_true_rules + 1 > self.pool_size:
            raise ConfigError("pool too small for the planted list")


def candidate_pool(config):
    """One single-feature rule per binary feature column."""
    return tuple(Rule((j,)) for j in range(config.pool_size))


def plant_instance(n, config, rng):
    """Simulate one replicate: (dataset, planted list, planted params).

    The planted list and feature matrix are redrawn together until every
    block, including the fall-through, holds at least min_block_share of the
    rows; tiny blocks make the target effectively unidentifiable.
    """
    pool = candidate_pool(config)
    floor = config.min_block_share * n
    for _ in range(config.max_redraws):
        features = (rng.random((n, config.pool_size)) < config.feature_rate).astype(np.int8)
        picks = rng.choice(config.pool_size, size=config.n_true_rules, replace=False)
        truth = RuleList(tuple(pool[int(j)] for j in picks))
        counts = subgroup_counts(truth, features)
        if counts.min() >= floor:
            break
    else:
        raise ConfigError(
            f"no planted list reached {config.min_block_share:.0%} per block "
            f"after {config.max_redraws} redraws"
        )

    L = truth.n_blocks
    k = config.n_confounders
    delta = rng.uniform(0.0, config.gap_scale, size=L)
    params = LatentParams(
        delta=delta,
        beta=rng.standard_normal((L, k)),
        lam=np.full(L, config.noise_precision),
        m=np.zeros(k),
        tau=1.0,
    )
    confounders = rng.standard_normal((n, k))
    t = rng.integers(0, 2, size=n).astype(np.int8)
    z = assign_subgroups(truth, features)
    y = simulate_outcomes(params, z, confounders, rng).observed(t)
    dataset = Dataset(rule_features=features, confounders=confounders.copy(), y=y, t=t)
    return dataset, truth, params


def _default_search(dataset, pool, config, rng):
    scorer = ModelScorer(dataset)
    walk = AnnealConfig(
        n_steps=config.n_steps,
        temperature=config.temperature,
        init_length=config.init_length,
    )
    return anneal(scorer, list(pool), walk, rng).best


def _run_cell(n, rep, config, seed, search_fn):
    rng = cell_rng(seed, n, rep)
    dataset, truth, _ = plant_instance(n, config, rng)
    pool = candidate_pool(config)
    found = search_fn(dataset, pool, config, rng)
    return n, rep, edit_distance(found, truth), found.n_rules, truth.n_rules


@dataclass
class RecoveryResult:
    sizes: tuple
    distances: dict  # n -> (n_replicates,) edit distances
    found_sizes: dict = field(default_factory=dict)

    @property
    def mean_distance(self):
        return np.array([np.mean(self.distances[n]) for n in self.sizes])

    def to_json(self):
        return {
            "sizes": [int(n) for n in self.sizes],
            "mean_distance": [float(v) for v in self.mean_distance],
            "distances": {str(n): [int(d) for d in self.distances[n]] for n in self.sizes},
        }


def run_recovery_study(config, seed, n_jobs=None, search_fn=None):
    """Recovery curve over config.sizes; one worker per (size, replicate).

    Every cell reseeds independently from (seed, size, replicate), so
    results do not depend on scheduling or worker count. search_fn takes
    (dataset, pool, config, rng) and returns a RuleList; the default runs
    the annealing search.
    """
    if search_fn is None:
        search_fn = _default_search
    if n_jobs is None:
        n_jobs = default_jobs()
    cells = [(int(n), rep) for n in config.sizes for rep in range(config.n_replicates)]
    outputs = Parallel(n_jobs=n_jobs)(
        delayed(_run_cell)(n, rep, config, seed, search_fn) for n, rep in cells
    )
    distances = {int(n): np.zeros(config.n_replicates, dtype=np.int64) for n in config.sizes}
    found_sizes = {int(n): np.zeros(config.n_replicates, dtype=np.int64) for n in config.sizes}
    for n, rep, dist, found_rules, _ in outputs:
        distances[n][rep] = dist
        found_sizes[n][rep] = found_rules
    return RecoveryResult(
        sizes=tuple(int(n) for n in config.sizes),
        distances=distances,
        found_sizes=found_sizes,
    )
