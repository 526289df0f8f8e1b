"""Synthetic wage study generator and its ingestion contract."""

import numpy as np

from cfrl.ingest import ingest, load_ingest_config
from cfrl.wage import (
    CATEGORICALS,
    N_MISSING_SEX,
    N_MISSING_WAGE,
    N_RAW,
    generate_wage_study,
    wage_ingest_config,
)

N_FEATURES = 4 + 3 + sum(len(levels) for levels, _ in CATEGORICALS.values())


def test_generator_writes_the_advertised_row_counts(tmp_path):
    csv_path, config_path = generate_wage_study(tmp_path)
    lines = open(csv_path).read().splitlines()
    assert len(lines) == 1 + N_RAW
    blank_wage = sum(1 for ln in lines[1:] if ln.split(",")[1] == "")
    blank_male = sum(1 for ln in lines[1:] if ln.split(",")[2] == "")
    assert blank_wage == N_MISSING_WAGE and blank_male == N_MISSING_SEX

    config = load_ingest_config(config_path)
    dataset, names, n_dropped = ingest(csv_path, config)
    assert n_dropped == N_MISSING_WAGE + N_MISSING_SEX
    assert dataset.n_rows == N_RAW - n_dropped
    assert len(names) == N_FEATURES == dataset.rule_features.shape[1]


def test_feature_vocabulary_covers_age_weeks_and_all_levels(tmp_path):
    csv_path, config_path = generate_wage_study(tmp_path)
    _, names, _ = ingest(csv_path, load_ingest_config(config_path))
    assert [n for n in names if n.startswith("age=")] == [f"age=q{k}" for k in (1, 2, 3, 4)]
    assert [n for n in names if n.startswith("weeks_worked=")] == \
        [f"weeks_worked=q{k}" for k in (1, 2, 3)]
    for column, (levels, _) in CATEGORICALS.items():
        assert [n for n in names if n.startswith(f"{column}=")] == \
            [f"{column}={level}" for level in levels]


def test_generated_values_are_plausible(tmp_path):
    csv_path, config_path = generate_wage_study(tmp_path)
    dataset, _, _ = ingest(csv_path, load_ingest_config(config_path))
    assert dataset.y.min() >= 0.5
    assert 5.0 < dataset.y.mean() < 15.0
    assert set(np.unique(dataset.t)) == {0, 1}
    assert 0.4 < dataset.t.mean() < 0.6
    # treated rows earn more on average: the planted premium is positive everywhere
    assert dataset.y[dataset.t == 1].mean() > dataset.y[dataset.t == 0].mean() + 0.5


def test_generation_is_deterministic_in_the_seed(tmp_path):
    a_csv, a_cfg = generate_wage_study(tmp_path / "a")
    b_csv, b_cfg = generate_wage_study(tmp_path / "b")
    assert open(a_csv, "rb").read() == open(b_csv, "rb").read()
    assert open(a_cfg, "rb").read() == open(b_cfg, "rb").read()
    c_csv, _ = generate_wage_study(tmp_path / "c", seed=2024)
    assert open(a_csv, "rb").read() != open(c_csv, "rb").read()


def test_config_document_matches_generated_columns():
    doc = wage_ingest_config()
    assert doc["outcome"] == "wage" and doc["treatment"] == "male"
    declared = {entry["column"] for entry in doc["columns"]}
    assert declared == {"age", "weeks_worked", *CATEGORICALS}
