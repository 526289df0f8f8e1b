"""Ordered rule lists, subgroup assignment, list edits, and list distance.

A rule list is an ordered sequence of distinct mined rules followed by an
implicit always-true default. A row belongs to the subgroup of the first rule
that fires on it (1-based), falling through to the default block. With M
mined rules the model has L = M + 1 blocks.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .mining import DEFAULT_RULE, Rule

MAX_RULES = 12  # mined rules per list; the default block is on top of this

MOVE_TYPES = ("swap", "replace", "insert", "delete")


@dataclass(frozen=True)
class RuleList:
    """Distinct mined rules in evaluation order; default block implicit."""

    rules: tuple

    def __post_init__(self):
        if len(set(self.rules)) != len(self.rules):
            raise ConfigError("rule list has duplicate rules")
        for rule in self.rules:
            if rule.is_default:
                raise ConfigError("the default rule is implicit, do not include it")
        if len(self.rules) > MAX_RULES:
            raise ConfigError(f"rule list longer than {MAX_RULES} rules")

    @property
    def n_rules(self):
        return len(self.rules)

    @property
    def n_blocks(self):
        """Subgroup count L, the mined rules plus the default block."""
        return len(self.rules) + 1

    def blocks(self):
        """The rules with the default appended, as evaluated."""
        return self.rules + (DEFAULT_RULE,)

    def __contains__(self, rule):
        return rule in self.rules

    def __iter__(self):
        return iter(self.rules)

    def describe(self, names):
        lines = [
            f"{l + 1}. IF {rule.describe(names)}" for l, rule in enumerate(self.rules)
        ]
        lines.append(f"{self.n_blocks}. DEFAULT")
        return "\n".join(lines)

    def to_json(self):
        return {"rules": [list(rule.clauses) for rule in self.rules]}

    @classmethod
    def from_json(cls, doc):
        return cls(tuple(Rule(tuple(sorted(c))) for c in doc["rules"]))


EMPTY_LIST = RuleList(())


def assign_subgroups(rule_list, features):
    """1-based first-firing-rule index per row; default block if none fire."""
    features = np.asarray(features)
    out = np.full(features.shape[0], rule_list.n_blocks, dtype=np.int64)
    for l in range(rule_list.n_rules - 1, -1, -1):
        out[rule_list.rules[l].fires(features)] = l + 1
    return out


def subgroup_counts(rule_list, features):
    """Row count per block, length n_blocks."""
    z = assign_subgroups(rule_list, features)
    return np.bincount(z - 1, minlength=rule_list.n_blocks)


# ---------------------------------------------------------------------------
# edit distance

def edit_distance(a, b):
    """Levenshtein distance between the mined-rule sequences of two lists.

    Unit cost for inserting, deleting, or substituting one rule; rules match
    exactly on their clause sets. The shared default block never counts.
    """
    left, right = a.rules, b.rules
    if len(left) < len(right):
        left, right = right, left
    previous = np.arange(len(right) + 1)
    current = np.empty(len(right) + 1, dtype=np.int64)
    for i, rule in enumerate(left, start=1):
        current[0] = i
        for j in range(1, len(right) + 1):
            substitution = previous[j - 1] + (rule != right[j - 1])
            current[j] = min(previous[j] + 1, current[j - 1] + 1, substitution)
        previous, current = current, previous
    return int(previous[len(right)])


# ---------------------------------------------------------------------------
# neighborhood moves

def feasible_moves(rule_list, pool):
    """Move types applicable to this list given the candidate pool."""
    in_list = set(rule_list.rules)
    n_unused = sum(1 for rule in pool if rule not in in_list)
    feasible = []
    if rule_list.n_rules >= 2:
        feasible.append("swap")
    if rule_list.n_rules >= 1 and n_unused >= 1:
        feasible.append("replace")
    if rule_list.n_rules < MAX_RULES and n_unused >= 1:
        feasible.append("insert")
    if rule_list.n_rules >= 1:
        feasible.append("delete")
    return feasible


_MOVE_WEIGHTS = {"insert": 2.0, "delete": 1.0, "replace": 1.0, "swap": 1.0}


def propose_move(rule_list, pool, rng):
    """One random edit of the list, for the annealing walk.

    A move type is drawn from the feasible types, with insert carrying twice
    the weight of each other type, then the edit is drawn uniformly within
    the type: swap two positions, replace a position with an unused pool
    rule, insert an unused pool rule at any gap, or delete a position.
    Returns (new RuleList, move type).

    The insert bias keeps the walk from starving its largest neighborhood: a
    pool of P rules offers about P*(L+1) distinct inserts against roughly L^2
    rearrangements, and once the walk holds a good partial list its progress
    is rate-limited by how often the few score-raising inserts come up. A
    uniform-over-edits kernel overshoots the other way and bloats the list
    with cheap junk inserts faster than deletes can clean it.
    """
    feasible = feasible_moves(rule_list, pool)
    if not feasible:
        raise ConfigError("no feasible moves: empty list and empty pool")
    weights = np.array([_MOVE_WEIGHTS[m] for m in feasible])
    move = feasible[rng.choice(len(feasible), p=weights / weights.sum())]
    rules = list(rule_list.rules)
    if move == "swap":
        i, j = rng.choice(len(rules), size=2, replace=False)
        rules[i], rules[j] = rules[j], rules[i]
    elif move == "delete":
        del rules[rng.integers(len(rules))]
    else:
        in_list = set(rules)
        unused = [rule for rule in pool if rule not in in_list]
        rule = unused[rng.integers(len(unused))]
        if move == "replace":
            rules[rng.integers(len(rules))] = rule
        else:
            rules.insert(rng.integers(len(rules) + 1), rule)
    return RuleList(tuple(rules)), move
