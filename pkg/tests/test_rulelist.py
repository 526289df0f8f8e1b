"""Rule lists: subgroup assignment, edit distance, and neighborhood moves."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfrl.errors import ConfigError
from cfrl.mining import DEFAULT_RULE, Rule
from cfrl.rulelist import (
    EMPTY_LIST,
    MAX_RULES,
    RuleList,
    assign_subgroups,
    edit_distance,
    feasible_moves,
    propose_move,
    subgroup_counts,
)

from .oracles import edit_distance_oracle

R0, R1, R2, R01, R12 = Rule((0,)), Rule((1,)), Rule((2,)), Rule((0, 1)), Rule((1, 2))


def test_rule_list_validation():
    RuleList((R0, R1))
    with pytest.raises(ConfigError):
        RuleList((R0, R0))
    with pytest.raises(ConfigError):
        RuleList((R0, DEFAULT_RULE))
    with pytest.raises(ConfigError):
        RuleList(tuple(Rule((j,)) for j in range(MAX_RULES + 1)))


def test_blocks_append_the_default():
    rl = RuleList((R0, R1))
    assert rl.n_blocks == 3
    assert rl.blocks() == (R0, R1, DEFAULT_RULE)
    assert EMPTY_LIST.n_blocks == 1
    assert EMPTY_LIST.blocks() == (DEFAULT_RULE,)


def test_first_firing_rule_wins():
    features = np.array([
        [1, 1, 0],  # rule 1 and rule 2 fire -> block 1
        [0, 1, 0],  # only rule 2 -> block 2
        [0, 0, 1],  # nothing -> default block 3
        [1, 0, 0],  # only rule 1 -> block 1
    ])
    rl = RuleList((R0, R1))
    np.testing.assert_array_equal(assign_subgroups(rl, features), [1, 2, 3, 1])
    np.testing.assert_array_equal(subgroup_counts(rl, features), [2, 1, 1])
    # every row of the empty list falls through to the default
    np.testing.assert_array_equal(assign_subgroups(EMPTY_LIST, features), 1)


def test_reordering_changes_assignment():
    features = np.array([[1, 1, 0]])
    assert assign_subgroups(RuleList((R0, R1)), features)[0] == 1
    assert assign_subgroups(RuleList((R1, R0)), features)[0] == 1
    assert RuleList((R0, R1)) != RuleList((R1, R0))


def test_edit_distance_frozen_cases():
    a = RuleList((R0, R1, R2))
    assert edit_distance(a, a) == 0
    assert edit_distance(a, RuleList((R0, R1))) == 1          # delete
    assert edit_distance(a, RuleList((R0, R12, R2))) == 1     # substitute
    assert edit_distance(a, RuleList((R1, R0, R2))) == 2      # transpose = 2 edits
    assert edit_distance(a, EMPTY_LIST) == 3
    assert edit_distance(EMPTY_LIST, EMPTY_LIST) == 0


def test_describe_numbers_blocks_and_names_the_default():
    text = RuleList((R01,)).describe(["a", "b"])
    assert text.splitlines() == ["1. IF a & b", "2. DEFAULT"]


def test_json_round_trip():
    rl = RuleList((R01, R2))
    assert RuleList.from_json(rl.to_json()) == rl


_rules = st.integers(0, 5).map(lambda j: Rule((j,)))
_lists = st.lists(_rules, max_size=6, unique=True).map(lambda rs: RuleList(tuple(rs)))


@settings(max_examples=200, deadline=None)
@given(_lists, _lists)
def test_edit_distance_matches_recursive_oracle(a, b):
    assert edit_distance(a, b) == edit_distance_oracle(a.rules, b.rules)


@settings(max_examples=200, deadline=None)
@given(_lists, _lists, _lists)
def test_edit_distance_is_a_metric(a, b, c):
    dab = edit_distance(a, b)
    assert dab == edit_distance(b, a)
    assert (dab == 0) == (a == b)
    assert dab <= edit_distance(a, c) + edit_distance(c, b)
    assert abs(a.n_rules - b.n_rules) <= dab <= max(a.n_rules, b.n_rules)


POOL = (R0, R1, R2, R01, R12)


def test_feasible_moves_depend_on_length_and_pool():
    assert feasible_moves(EMPTY_LIST, POOL) == ["insert"]
    assert feasible_moves(RuleList((R0,)), POOL) == ["replace", "insert", "delete"]
    assert feasible_moves(RuleList((R0, R1)), POOL) == ["swap", "replace", "insert", "delete"]
    # pool exhausted: no replace or insert
    assert feasible_moves(RuleList((R0, R1)), (R0, R1)) == ["swap", "delete"]
    assert feasible_moves(EMPTY_LIST, ()) == []


def test_propose_move_yields_a_neighbor_at_distance_le_two():
    rng = np.random.default_rng(0)
    current = RuleList((R0, R1))
    seen = set()
    for _ in range(300):
        neighbor, move = propose_move(current, POOL, rng)
        assert move in feasible_moves(current, POOL)
        seen.add(move)
        # swap of adjacent-or-not rules costs at most 2 substitutions
        assert 1 <= edit_distance(current, neighbor) <= 2
        if move in ("insert", "delete"):
            assert abs(neighbor.n_rules - current.n_rules) == 1
        else:
            assert neighbor.n_rules == current.n_rules
    assert seen == {"swap", "replace", "insert", "delete"}


def test_propose_move_never_duplicates_rules():
    rng = np.random.default_rng(1)
    current = RuleList((R0, R1, R2))
    for _ in range(300):
        neighbor, _ = propose_move(current, POOL, rng)
        assert len(set(neighbor.rules)) == neighbor.n_rules
        current = neighbor


def test_propose_move_requires_an_option():
    with pytest.raises(ConfigError):
        propose_move(EMPTY_LIST, (), np.random.default_rng(0))
