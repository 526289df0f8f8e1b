"""From a raw CSV to a candidate rule pool.

Builds a tiny survey-style table, declares how each column binarizes, and
mines every frequent conjunction of the resulting indicator features. The
pool printed at the end is the search space the other demos explore.
"""

import json
import os
import tempfile

import numpy as np

from cfrl.ingest import ingest, load_ingest_config
from cfrl.mining import mine_rules

rng = np.random.default_rng(1)
n = 400

# a numeric column, a binary flag, and a categorical with grouped levels
age = rng.integers(21, 65, size=n)
union = rng.integers(0, 2, size=n)
sector = rng.choice(["tech", "finance", "retail", "food"], size=n)
t = rng.integers(0, 2, size=n)
y = 10 + 0.1 * age + 2.0 * t * union + rng.normal(0, 1, size=n)

workdir = tempfile.mkdtemp(prefix="cfrl_demo_")
csv_path = os.path.join(workdir, "survey.csv")
with open(csv_path, "w", encoding="utf-8") as f:
    f.write("age,union,sector,t,y\n")
    for i in range(n):
        f.write(f"{age[i]},{union[i]},{sector[i]},{t[i]},{y[i]:.4f}\n")

# numeric columns get quantile bins; categoricals can merge levels
config_doc = {
    "outcome": "y",
    "treatment": "t",
    "columns": [
        {"column": "age", "kind": "numeric", "bins": 4},
        {"column": "union", "kind": "binary"},
        {"column": "sector", "kind": "categorical",
         "groups": {"tech": "office", "finance": "office",
                    "retail": "counter", "food": "counter"}},
    ],
}
config_path = os.path.join(workdir, "config.json")
with open(config_path, "w", encoding="utf-8") as f:
    json.dump(config_doc, f, indent=2)

dataset, names, n_dropped = ingest(csv_path, load_ingest_config(config_path))
print(f"ingested {dataset.n_rows} rows ({n_dropped} dropped), "
      f"{len(names)} indicator features:")
print("  " + ", ".join(names))

# every feature column is 0/1 after binarization
assert set(np.unique(dataset.rule_features)) <= {0, 1}

pool = mine_rules(dataset.rule_features, names, min_support=0.10, max_clauses=2)
print(f"\nmined {len(pool)} rules with support >= 10% "
      f"(up to 2 clauses), sorted by support:")
for rule in list(pool)[:12]:
    fires = dataset.rule_features[:, list(rule.clauses)].all(axis=1).mean()
    print(f"  {rule.describe(names):38s} fires on {fires:5.1%} of rows")
print("  ...")
