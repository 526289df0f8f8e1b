"""Synthetic census-style wage extract for the end-to-end demonstration.

Writes a CSV of 7600 survey rows (52 of them unusable for missing wage or
sex, leaving 7548) plus the matching ingestion config: hourly wage outcome,
male indicator treatment, and 15 covariate columns that binarize to 54
indicator features. Wages carry a planted male premium that falls in steps
across education/occupation strata, so a falling-effect list is actually in
the data for the pipeline to find.
"""

import csv
import json
import os


from ._util import named_rng

N_RAW = 7600
N_MISSING_WAGE = 30
N_MISSING_SEX = 22

CATEGORICALS = {
    "education": (
        ["no_diploma", "high_school", "some_college", "associate", "bachelor", "advanced"],
        [0.13, 0.33, 0.19, 0.08, 0.18, 0.09],
    ),
    "occupation": (
        ["managerial", "professional", "technical", "service", "production", "laborer"],
        [0.14, 0.15, 0.17, 0.20, 0.22, 0.12],
    ),
    "industry": (
        ["manufacturing", "trade", "services", "government", "construction"],
        [0.20, 0.22, 0.34, 0.14, 0.10],
    ),
    "marital_status": (
        ["married", "never_married", "divorced", "widowed"],
        [0.55, 0.27, 0.14, 0.04],
    ),
    "region": (
        ["northeast", "midwest", "south", "west"],
        [0.20, 0.24, 0.34, 0.22],
    ),
    "race": (
        ["white", "black", "asian", "other"],
        [0.78, 0.11, 0.06, 0.05],
    ),
    "class_of_worker": (
        ["private", "government", "self_employed"],
        [0.76, 0.15, 0.09],
    ),
    "metro_status": (
        ["metro", "nonmetro", "mixed"],
        [0.70, 0.22, 0.08],
    ),
    "citizenship": (
        ["native", "naturalized", "noncitizen"],
        [0.88, 0.05, 0.07],
    ),
    "school_enrollment": (
        ["not_enrolled", "part_time", "full_time"],
        [0.90, 0.06, 0.04],
    ),
    "veteran": (["no", "yes"], [0.86, 0.14]),
    "union_member": (["no", "yes"], [0.82, 0.18]),
    "owns_home": (["no", "yes"], [0.36, 0.64]),
}

_EDU_STEP = {
    "no_diploma": 0.0, "high_school": 0.9, "some_college": 1.5,
    "associate": 1.9, "bachelor": 3.1, "advanced": 4.6,
}
_OCC_STEP = {
    "managerial": 2.2, "professional": 2.0, "technical": 1.1,
    "service": 0.2, "production": 0.7, "laborer": 0.0,
}


def _male_premium(row):
    """Planted treatment effect: large at the top strata, fading below."""
    college = row["education"] in ("bachelor", "advanced")
    upper = row["occupation"] in ("managerial", "professional")
    if college and upper:
        return 5.2
    if college:
        return 3.8
    if upper:
        return 3.0
    if row["union_member"] == "yes":
        return 2.2
    if row["age"] >= 45:
        return 1.7
    if row["weeks_worked"] >= 48:
        return 1.0
    return 0.6


def _draw_rows(rng):
    rows = []
    for i in range(N_RAW):
        row = {"id": i + 1}
        row["age"] = int(rng.integers(18, 66))
        if rng.random() < 0.62:
            row["weeks_worked"] = int(rng.integers(48, 53))
        else:
            row["weeks_worked"] = int(rng.integers(1, 53))
        for name, (levels, probs) in CATEGORICALS.items():
            row[name] = levels[int(rng.choice(len(levels), p=probs))]
        row["male"] = int(rng.random() < 0.52)

        years = row["age"] - 18
        base = (
            3.2
            + _EDU_STEP[row["education"]]
            + _OCC_STEP[row["occupation"]]
            + 0.055 * years
            - 0.0006 * years**2
            + 0.01 * row["weeks_worked"]
            + (0.6 if row["union_member"] == "yes" else 0.0)
            + (0.3 if row["class_of_worker"] == "government" else 0.0)
            + (0.5 if row["metro_status"] == "metro" else 0.0)
        )
        wage = base + row["male"] * _male_premium(row) + rng.normal(0.0, 2.0)
        row["wage"] = round(max(wage, 0.5), 2)
        rows.append(row)
    # blank out a few outcome and treatment cells; ingestion must drop these
    unusable = rng.choice(N_RAW, size=N_MISSING_WAGE + N_MISSING_SEX, replace=False)
    for i in unusable[:N_MISSING_WAGE]:
        rows[int(i)]["wage"] = ""
    for i in unusable[N_MISSING_WAGE:]:
        rows[int(i)]["male"] = ""
    return rows


def wage_ingest_config():
    columns = [
        {"column": "age", "kind": "numeric", "bins": 4},
        {"column": "weeks_worked", "kind": "numeric", "bins": 3},
    ]
    for name, (levels, _) in CATEGORICALS.items():
        columns.append(
            {"column": name, "kind": "categorical", "groups": {v: v for v in levels}}
        )
    return {"outcome": "wage", "treatment": "male", "columns": columns}


def generate_wage_study(out_dir, seed=1995):
    """Write wage.csv and wage_ingest.json under out_dir; returns the paths."""
    rng = named_rng(seed, "wage")
    rows = _draw_rows(rng)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "wage.csv")
    fields = ["id", "wage", "male", "age", "weeks_worked"] + list(CATEGORICALS)
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    config_path = os.path.join(out_dir, "wage_ingest.json")
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump(wage_ingest_config(), f, indent=2)
        f.write("\n")
    return csv_path, config_path
