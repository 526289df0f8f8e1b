"""Simulated-annealing search over rule lists, scored by the fitted bound.

Each candidate list is scored by running the coordinate-ascent fit to
convergence and taking the final bound as the model's evidence surrogate.
Scores are cached (the walk revisits neighborhoods constantly), and a
candidate whose fit degenerates numerically scores -inf rather than killing
the walk.
"""

import logging
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ParameterError
from .model import Hyperparameters, SubgroupStats
from .rulelist import RuleList, propose_move
from .vi import fit_vi

log = logging.getLogger(__name__)


class ScoreCache:
    """Thread-safe LRU map from rule tuples to scores."""

    def __init__(self, max_size=10000):
        if max_size < 0:
            raise ParameterError(f"cache size must be >= 0, got {max_size}")
        self.max_size = max_size
        self._store = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        with self._lock:
            if key in self._store:
                self._store.move_to_end(key)
                self.hits += 1
                return self._store[key]
            self.misses += 1
            return None

    def put(self, key, value):
        if self.max_size == 0:
            return
        with self._lock:
            self._store[key] = value
            self._store.move_to_end(key)
            while len(self._store) > self.max_size:
                self._store.popitem(last=False)

    def __len__(self):
        return len(self._store)


class ModelScorer:
    """Scores rule lists against one dataset; owns the per-dataset caches.

    Rule firing masks are computed once per pool rule, so a candidate's
    subgroup labels cost O(N L) instead of re-walking clause columns.
    """

    def __init__(self, dataset, hyper=None, k_h=None, max_iter=500, rel_tol=1e-6,
                 cache_size=10000):
        self.dataset = dataset
        self.hyper = hyper if hyper is not None else Hyperparameters.from_outcomes(dataset.y)
        self.k_h = k_h
        self.max_iter = max_iter
        self.rel_tol = rel_tol
        self.cache = ScoreCache(cache_size)
        self._fire = {}

    def _mask(self, rule):
        mask = self._fire.get(rule)
        if mask is None:
            mask = rule.fires(self.dataset.rule_features)
            self._fire[rule] = mask
        return mask

    def assign(self, rule_list):
        out = np.full(self.dataset.n_rows, rule_list.n_blocks, dtype=np.int64)
        for l in range(rule_list.n_rules - 1, -1, -1):
            out[self._mask(rule_list.rules[l])] = l + 1
        return out

    def stats(self, rule_list):
        z = self.assign(rule_list)
        return SubgroupStats.from_data(
            z, self.dataset.confounders, self.dataset.t, self.dataset.y,
            rule_list.n_blocks,
        )

    def fit(self, rule_list):
        """Full fit, uncached: (posterior, trace)."""
        return fit_vi(
            self.stats(rule_list), self.hyper, k_h=self.k_h,
            max_iter=self.max_iter, rel_tol=self.rel_tol,
        )

    def score(self, rule_list):
        """Converged bound for the list; -inf if the fit degenerates."""
        key = rule_list.rules
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        try:
            _, trace = self.fit(rule_list)
            value = trace.final
        except NumericalError as exc:
            log.warning("fit failed for %d-rule list, scoring -inf: %s",
                        rule_list.n_rules, exc)
            value = -math.inf
        self.cache.put(key, value)
        return value


@dataclass(frozen=True)
class AnnealConfig:
    n_steps: int
    temperature: float = 1.0
    init_length: int = 3
    cache_size: int = 10000

    def __post_init__(self):
        if self.n_steps < 0:
            raise ParameterError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.temperature < 0:
            raise ParameterError(f"temperature must be >= 0, got {self.temperature}")
        if self.init_length < 0:
            raise ParameterError(f"init_length must be >= 0, got {self.init_length}")


@dataclass
class SearchResult:
    best: RuleList
    best_score: float
    final: RuleList
    final_score: float
    trace: list = field(repr=False)  # step records, step 0 is the start state
    n_scored: int = 0

    def trace_rows(self):
        """Trace as (header, rows) for CSV export."""
        header = ["step", "move", "accepted", "score", "n_rules", "best_score"]
        rows = [
            [r["step"], r["move"], int(r["accepted"]), r["score"], r["n_rules"],
             r["best_score"]]
            for r in self.trace
        ]
        return header, rows


def initial_list(pool, init_length, rng):
    """init_length distinct pool rules, uniform, in drawn order."""
    take = min(init_length, len(pool))
    if take == 0:
        return RuleList(())
    picks = rng.choice(len(pool), size=take, replace=False)
    return RuleList(tuple(pool[int(i)] for i in picks))


def anneal(scorer, pool, config, rng, start=None):
    """Metropolis walk over rule lists; returns the best list ever scored.

    Moves come uniformly from the feasible edit types; a worse candidate is
    accepted with probability exp((score' - score) / temperature). At
    temperature 0 the walk is greedy.
    """
    current = start if start is not None else initial_list(pool, config.init_length, rng)
    current_score = scorer.score(current)
    best, best_score = current, current_score
    trace = [{
        "step": 0, "move": "init", "accepted": True, "score": current_score,
        "n_rules": current.n_rules, "best_score": best_score,
    }]
    for step in range(1, config.n_steps + 1):
        candidate, move = propose_move(current, pool, rng)
        candidate_score = scorer.score(candidate)
        gain = candidate_score - current_score
        if gain >= 0:
            accepted = True
        elif config.temperature > 0 and np.isfinite(candidate_score):
            accepted = math.log(rng.random()) < gain / config.temperature
        else:
            accepted = False
        if accepted:
            current, current_score = candidate, candidate_score
            if current_score > best_score:
                best, best_score = current, current_score
        trace.append({
            "step": step, "move": move, "accepted": accepted,
            "score": current_score, "n_rules": current.n_rules,
            "best_score": best_score,
        })
    return SearchResult(
        best=best, best_score=best_score, final=current, final_score=current_score,
        trace=trace, n_scored=scorer.cache.misses,
    )
