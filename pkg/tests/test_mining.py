"""Candidate rule mining against exhaustive enumeration."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfrl.errors import ConfigError, DimensionError, EmptyInputError
from cfrl.mining import DEFAULT_RULE, Rule, RulePool, mine_rules, rule_support

from .oracles import brute_force_rules


def _random_features(rng, n, k, rate=0.5):
    return (rng.random((n, k)) < rate).astype(np.int8)


def test_rule_identity_requires_canonical_clause_tuple():
    Rule((0, 2, 5))
    with pytest.raises(ConfigError):
        Rule((2, 0))
    with pytest.raises(ConfigError):
        Rule((1, 1))


def test_rule_firing_is_a_conjunction():
    features = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]])
    np.testing.assert_array_equal(Rule((0, 1)).fires(features), [True, False, False, True])
    np.testing.assert_array_equal(DEFAULT_RULE.fires(features), [True] * 4)
    assert DEFAULT_RULE.is_default
    assert rule_support(Rule((2,)), features) == 0.75
    assert Rule((0, 1)).describe(["a", "b", "c"]) == "a & b"
    assert DEFAULT_RULE.describe([]) == "DEFAULT"


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("min_support, max_clauses", [(0.3, 2), (0.1, 3), (0.5, 1), (0.05, 4)])
def test_mining_matches_exhaustive_enumeration(seed, min_support, max_clauses):
    rng = np.random.default_rng(seed)
    features = _random_features(rng, rng.integers(5, 60), rng.integers(1, 10))
    names = [f"f{j}" for j in range(features.shape[1])]
    pool = mine_rules(features, names, min_support, max_clauses)
    expected = brute_force_rules(features, min_support, max_clauses)
    assert sorted(r.clauses for r in pool.rules) == sorted(expected)


def test_pool_is_ordered_by_support_then_clauses():
    rng = np.random.default_rng(3)
    features = _random_features(rng, 200, 8)
    pool = mine_rules(features, [f"f{j}" for j in range(8)], 0.05, 3)
    keys = [(-s, r.clauses) for r, s in zip(pool.rules, pool.supports)]
    assert keys == sorted(keys)
    for rule, support in zip(pool.rules, pool.supports):
        assert support == rule_support(rule, features)
        assert 1 <= rule.n_clauses <= 3


def test_support_threshold_is_a_ceiling_count():
    # 10 rows, min_support 0.25 -> a rule needs ceil(2.5) = 3 firing rows
    features = np.zeros((10, 2), dtype=np.int8)
    features[:2, 0] = 1
    features[:3, 1] = 1
    pool = mine_rules(features, ["a", "b"], 0.25, 1)
    assert [r.clauses for r in pool.rules] == [(1,)]


def test_mining_input_validation():
    ok = np.ones((4, 2), dtype=np.int8)
    with pytest.raises(EmptyInputError):
        mine_rules(np.zeros((0, 2)), ["a", "b"], 0.1, 2)
    with pytest.raises(DimensionError):
        mine_rules(np.zeros(4), ["a"], 0.1, 2)
    with pytest.raises(DimensionError):
        mine_rules(ok, ["a"], 0.1, 2)
    with pytest.raises(ConfigError):
        mine_rules(ok, ["a", "b"], 0.0, 2)
    with pytest.raises(ConfigError):
        mine_rules(ok, ["a", "b"], 0.1, 0)


def test_pool_round_trips_through_json(tmp_path):
    rng = np.random.default_rng(5)
    features = _random_features(rng, 80, 6)
    pool = mine_rules(features, [f"f{j}" for j in range(6)], 0.2, 2)
    path = tmp_path / "pool.json"
    pool.save(path)
    loaded = RulePool.load(path)
    assert loaded.rules == pool.rules
    assert loaded.supports == pool.supports
    assert loaded.feature_names == pool.feature_names
    assert (loaded.min_support, loaded.max_clauses) == (pool.min_support, pool.max_clauses)
    # identical bytes when saved again
    path2 = tmp_path / "pool2.json"
    loaded.save(path2)
    assert path.read_bytes() == path2.read_bytes()


def test_pool_load_rejects_out_of_range_clause(tmp_path):
    doc = {"feature_names": ["a"], "min_support": 0.1, "max_clauses": 2,
           "rules": [{"clauses": [3], "support": 0.5}]}
    with pytest.raises(ConfigError):
        RulePool.from_json(doc)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(3, 40),
    k=st.integers(1, 8),
    min_support=st.floats(0.05, 0.9),
    max_clauses=st.integers(1, 3),
)
def test_mining_matches_enumeration_on_random_instances(seed, n, k, min_support, max_clauses):
    rng = np.random.default_rng(seed)
    features = _random_features(rng, n, k, rate=rng.uniform(0.2, 0.8))
    pool = mine_rules(features, [f"f{j}" for j in range(k)], min_support, max_clauses)
    expected = brute_force_rules(features, min_support, max_clauses)
    assert sorted(r.clauses for r in pool.rules) == sorted(expected)
    threshold = max(math.ceil(min_support * n), 1)
    for rule in pool.rules:
        assert rule.fires(features).sum() >= threshold
