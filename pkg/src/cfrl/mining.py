"""Frequent conjunctive rules over binary feature matrices.

A rule is a conjunction of feature clauses; it fires on a row when every
referenced feature is 1. The candidate pool is the set of all rules with at
most ``max_clauses`` clauses whose empirical support meets ``min_support``,
found with an FP-growth pass whose recursion is cut off at the clause bound.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, EmptyInputError

# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True, order=True)
class Rule:
    """A conjunction of feature indices. Identity is the clause set."""

    clauses: tuple

    def __post_init__(self):
        if tuple(sorted(set(self.clauses))) != self.clauses:
            raise ConfigError(f"clauses must be sorted and unique, got {self.clauses}")

    @property
    def n_clauses(self):
        return len(self.clauses)

    @property
    def is_default(self):
        return not self.clauses

    def fires(self, features):
        """Boolean row mask over a 0/1 feature matrix."""
        features = np.asarray(features)
        if self.is_default:
            return np.ones(features.shape[0], dtype=bool)
        return features[:, list(self.clauses)].all(axis=1)

    def describe(self, names):
        if self.is_default:
            return "DEFAULT"
        return " & ".join(names[j] for j in self.clauses)


DEFAULT_RULE = Rule(())


def rule_support(rule, features):
    """Fraction of rows the rule fires on."""
    return float(rule.fires(features).mean())


# ---------------------------------------------------------------------------
# FP-tree


class _Node:
    __slots__ = ("item", "count", "parent", "children", "next_same_item")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children = {}
        self.next_same_item = None


class _Tree:
    """Prefix tree of transactions with per-item node chains."""

    def __init__(self):
        self.root = _Node(None, None)
        self.heads = {}  # item -> first node in chain
        self.counts = {}  # item -> total count in tree

    def insert(self, items, count):
        node = self.root
        for item in items:
            child = node.children.get(item)
            if child is None:
                child = _Node(item, node)
                child.next_same_item = self.heads.get(item)
                self.heads[item] = child
                node.children[item] = child
            child.count += count
            self.counts[item] = self.counts.get(item, 0) + count
            node = child

    def prefix_paths(self, item):
        """(path items leaf-exclusive, count) for every chain node of item."""
        paths = []
        node = self.heads.get(item)
        while node is not None:
            path = []
            up = node.parent
            while up.item is not None:
                path.append(up.item)
                up = up.parent
            path.reverse()
            paths.append((path, node.count))
            node = node.next_same_item
        return paths


def _conditional_tree(paths, min_count):
    support = {}
    for path, count in paths:
        for item in path:
            support[item] = support.get(item, 0) + count
    keep = {item for item, c in support.items() if c >= min_count}
    tree = _Tree()
    for path, count in paths:
        filtered = [item for item in path if item in keep]
        if filtered:
            tree.insert(filtered, count)
    return tree


def _mine_tree(tree, suffix, min_count, max_clauses, out):
    # iterate least-frequent first so conditional trees stay small
    items = sorted(tree.counts, key=lambda item: (tree.counts[item], item))
    for item in items:
        count = tree.counts[item]
        if count < min_count:
            continue
        itemset = suffix + (item,)
        out.append((itemset, count))
        if len(itemset) >= max_clauses:
            continue
        conditional = _conditional_tree(tree.prefix_paths(item), min_count)
        if conditional.counts:
            _mine_tree(conditional, itemset, min_count, max_clauses, out)


# ---------------------------------------------------------------------------
# pool


@dataclass(frozen=True)
class RulePool:
    """Mined candidate rules with supports, plus the feature vocabulary.

    Ordered by support descending, ties broken by the clause tuple, so a pool
    is a pure function of (features, min_support, max_clauses).
    """

    rules: tuple
    supports: tuple  # fractions aligned with rules
    feature_names: tuple
    min_support: float
    max_clauses: int

    def __post_init__(self):
        if len(self.rules) != len(self.supports):
            raise DimensionError("rules and supports are misaligned")

    def __len__(self):
        return len(self.rules)

    def __getitem__(self, i):
        return self.rules[i]

    def __iter__(self):
        return iter(self.rules)

    def describe(self, i):
        return self.rules[i].describe(self.feature_names)

    def to_json(self):
        return {
            "feature_names": list(self.feature_names),
            "min_support": self.min_support,
            "max_clauses": self.max_clauses,
            "rules": [
                {"clauses": list(r.clauses), "support": s}
                for r, s in zip(self.rules, self.supports)
            ],
        }

    @classmethod
    def from_json(cls, doc):
        names = tuple(doc["feature_names"])
        rules, supports = [], []
        for entry in doc["rules"]:
            clauses = tuple(sorted(entry["clauses"]))
            if clauses and clauses[-1] >= len(names):
                raise ConfigError(f"clause index {clauses[-1]} out of range")
            rules.append(Rule(clauses))
            supports.append(float(entry["support"]))
        return cls(
            rules=tuple(rules),
            supports=tuple(supports),
            feature_names=names,
            min_support=float(doc["min_support"]),
            max_clauses=int(doc["max_clauses"]),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def mine_rules(features, feature_names, min_support, max_clauses):
    """All conjunctions of <= max_clauses features with support >= min_support.

    min_support is a fraction of rows; a rule qualifies when
    count >= ceil(min_support * n). The default (empty) rule is not part of
    the pool; rule lists append it separately.
    """
    features = np.asarray(features)
    if features.ndim != 2:
        raise DimensionError("feature matrix must be 2-D")
    n, k = features.shape
    if n == 0:
        raise EmptyInputError("no rows to mine")
    if len(feature_names) != k:
        raise DimensionError(f"{len(feature_names)} names for {k} features")
    if not 0.0 < min_support <= 1.0:
        raise ConfigError(f"min_support must be in (0, 1], got {min_support}")
    if max_clauses < 1:
        raise ConfigError(f"max_clauses must be >= 1, got {max_clauses}")

    min_count = int(np.ceil(min_support * n))
    min_count = max(min_count, 1)

    counts = features.sum(axis=0)
    frequent = counts >= min_count
    tree = _Tree()
    for row in features.astype(bool):
        items = np.flatnonzero(row & frequent)
        # frequency-descending insertion order keeps the prefix tree compact
        items = sorted(items, key=lambda j: (-counts[j], j))
        tree.insert(items, 1)

    found = []
    _mine_tree(tree, (), min_count, max_clauses, found)

    scored = []
    for itemset, count in found:
        rule = Rule(tuple(sorted(int(j) for j in itemset)))
        scored.append((count / n, rule))
    scored.sort(key=lambda pair: (-pair[0], pair[1].clauses))
    return RulePool(
        rules=tuple(rule for _, rule in scored),
        supports=tuple(support for support, _ in scored),
        feature_names=tuple(feature_names),
        min_support=float(min_support),
        max_clauses=int(max_clauses),
    )
