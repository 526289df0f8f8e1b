"""CSV loading, quantile/group binarization, and dataset assembly."""

import textwrap

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfrl.errors import (
    ConfigError,
    DegenerateBinningError,
    DimensionError,
    ParseError,
    SchemaError,
)
from cfrl.ingest import (
    Column,
    Dataset,
    IngestConfig,
    LevelGroups,
    QuantileBins,
    RawTable,
    _bin_categorical,
    _bin_numeric,
    assemble_dataset,
    binarize,
    ingest,
    load_csv,
    parse_ingest_config,
)

CONFIG_DOC = {
    "outcome": "y",
    "treatment": "t",
    "columns": [
        {"column": "age", "kind": "numeric", "bins": 2},
        {"column": "job", "kind": "categorical", "groups": {"a": "white", "b": "white", "c": "blue"}},
        {"column": "member", "kind": "binary"},
    ],
}


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


def test_quantile_binning_two_bins_splits_at_median():
    col = Column("age", "numeric", np.array([1.0, 2.0, 3.0, 4.0]))
    matrix, names = _bin_numeric(col, 2)
    # median of 1..4 is 2.5; values at or below go to the first bin
    np.testing.assert_array_equal(matrix[:, 0], [1, 1, 0, 0])
    np.testing.assert_array_equal(matrix[:, 1], [0, 0, 1, 1])
    assert names == ["age=q1", "age=q2"]


def test_quantile_binning_sends_ties_to_the_lower_bin():
    col = Column("age", "numeric", np.array([1.0, 2.0, 2.0, 4.0]))
    matrix, _ = _bin_numeric(col, 2)
    # the median is exactly 2.0, so both 2.0 rows land in bin 1
    np.testing.assert_array_equal(matrix[:, 0], [1, 1, 1, 0])


def test_quantile_binning_four_bins():
    col = Column("x", "numeric", np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]))
    matrix, names = _bin_numeric(col, 4)
    expected = np.repeat(np.arange(4), 2)
    np.testing.assert_array_equal(matrix.argmax(axis=1), expected)
    assert names == ["x=q1", "x=q2", "x=q3", "x=q4"]


def test_constant_column_cannot_be_binned():
    col = Column("flatline", "numeric", np.full(10, 3.3))
    with pytest.raises(DegenerateBinningError):
        _bin_numeric(col, 2)


def test_categorical_grouping_merges_levels_in_spec_order():
    col = Column("job", "categorical", np.array(["b", "c", "a", "c"], dtype=object))
    directive = LevelGroups((("a", "white"), ("b", "white"), ("c", "blue")))
    matrix, names = _bin_categorical(col, directive)
    assert names == ["job=white", "job=blue"]
    np.testing.assert_array_equal(matrix[:, 0], [1, 0, 1, 0])
    np.testing.assert_array_equal(matrix[:, 1], [0, 1, 0, 1])


def test_unmapped_level_is_a_schema_error():
    col = Column("job", "categorical", np.array(["a", "mystery"], dtype=object))
    directive = LevelGroups((("a", "white"),))
    with pytest.raises(SchemaError, match="mystery"):
        _bin_categorical(col, directive)


def test_binarize_emits_one_hot_rows_per_column():
    config = parse_ingest_config(CONFIG_DOC)
    table = RawTable((
        Column("age", "numeric", np.array([30.0, 50.0, 41.0, 22.0])),
        Column("job", "categorical", np.array(["a", "b", "c", "c"], dtype=object)),
        Column("member", "binary", np.array([1.0, 0.0, 0.0, 1.0])),
    ))
    features = binarize(table, config.spec)
    assert features.names == ["age=q1", "age=q2", "job=white", "job=blue", "member=1"]
    # each binned column activates exactly one indicator per row
    np.testing.assert_array_equal(features.matrix[:, 0:2].sum(axis=1), 1)
    np.testing.assert_array_equal(features.matrix[:, 2:4].sum(axis=1), 1)
    np.testing.assert_array_equal(features.matrix[:, 4], [1, 0, 0, 1])


def test_binarize_rejects_directive_kind_mismatch():
    table = RawTable((Column("age", "categorical", np.array(["x", "y"], dtype=object)),))
    from cfrl.ingest import BinarizationSpec

    with pytest.raises(ConfigError):
        binarize(table, BinarizationSpec({"age": QuantileBins(2)}))


def test_quantile_bins_requires_at_least_two():
    with pytest.raises(ConfigError):
        QuantileBins(1)


def test_parse_config_rejects_malformed_documents():
    with pytest.raises(ConfigError):
        parse_ingest_config([])
    with pytest.raises(ConfigError):
        parse_ingest_config({"outcome": "y", "columns": []})
    with pytest.raises(ConfigError):
        parse_ingest_config({"outcome": "y", "treatment": "t",
                             "columns": [{"column": "a", "kind": "exotic"}]})
    with pytest.raises(ConfigError):
        parse_ingest_config({"outcome": "y", "treatment": "t",
                             "columns": [{"column": "a", "kind": "numeric"}]})
    with pytest.raises(ConfigError):
        parse_ingest_config({"outcome": "y", "treatment": "t",
                             "columns": [{"column": "a", "kind": "categorical", "groups": {}}]})
    doc = {"outcome": "y", "treatment": "t",
           "columns": [{"column": "a", "kind": "binary"}, {"column": "a", "kind": "binary"}]}
    with pytest.raises(ConfigError, match="duplicate"):
        parse_ingest_config(doc)
    doc = {"outcome": "a", "treatment": "t", "columns": [{"column": "a", "kind": "binary"}]}
    with pytest.raises(ConfigError):
        parse_ingest_config(doc)


def test_load_csv_drops_rows_missing_outcome_or_treatment(tmp_path):
    path = _write(tmp_path, """\
        y,t,age,job,member,ignored
        1.5,1,30,a,1,junk
        ,1,50,b,0,junk
        2.5,,41,c,no,junk
        3.5,0,22,c,yes,junk
        """)
    config = parse_ingest_config(CONFIG_DOC)
    table, y, t, n_dropped = load_csv(path, config)
    assert n_dropped == 2
    np.testing.assert_array_equal(y, [1.5, 3.5])
    np.testing.assert_array_equal(t, [1, 0])
    # undeclared trailing column is ignored, binary text forms are accepted
    np.testing.assert_array_equal(table.column("member").values, [1.0, 1.0])


def test_load_csv_missing_covariate_is_an_error_with_location(tmp_path):
    path = _write(tmp_path, """\
        y,t,age,job,member
        1.0,1,30,a,1
        2.0,0,,b,0
        """)
    config = parse_ingest_config(CONFIG_DOC)
    with pytest.raises(ParseError) as excinfo:
        load_csv(path, config)
    assert excinfo.value.row == 3
    assert excinfo.value.column == "age"


def test_load_csv_rejects_ragged_rows_and_bad_numbers(tmp_path):
    config = parse_ingest_config(CONFIG_DOC)
    ragged = _write(tmp_path, """\
        y,t,age,job,member
        1.0,1,30,a
        """, name="ragged.csv")
    with pytest.raises(ParseError):
        load_csv(ragged, config)
    bad = _write(tmp_path, """\
        y,t,age,job,member
        oops,1,30,a,1
        """, name="bad.csv")
    with pytest.raises(ParseError):
        load_csv(bad, config)


def test_load_csv_requires_declared_columns(tmp_path):
    path = _write(tmp_path, """\
        y,t,age,job
        1.0,1,30,a
        """)
    config = parse_ingest_config(CONFIG_DOC)
    with pytest.raises(SchemaError, match="member"):
        load_csv(path, config)


def test_dataset_validates_shapes_and_binary_entries():
    y = np.zeros(3)
    t = np.array([0, 1, 0])
    good = np.array([[0, 1], [1, 0], [1, 1]])
    conf = np.zeros((3, 2))
    Dataset(rule_features=good, confounders=conf, y=y, t=t)
    with pytest.raises(DimensionError):
        Dataset(rule_features=good * 2, confounders=conf, y=y, t=t)
    with pytest.raises(DimensionError):
        Dataset(rule_features=good[:2], confounders=conf, y=y, t=t)
    with pytest.raises(DimensionError):
        Dataset(rule_features=good, confounders=conf, y=y, t=np.array([0, 2, 0]))


def test_ingest_end_to_end_reuses_features_as_confounders(tmp_path):
    path = _write(tmp_path, """\
        y,t,age,job,member
        1.0,1,30,a,1
        2.0,0,50,b,0
        3.0,1,41,c,0
        4.0,0,22,c,1
        """)
    config = parse_ingest_config(CONFIG_DOC)
    dataset, names, n_dropped = ingest(path, config)
    assert n_dropped == 0
    assert names == ["age=q1", "age=q2", "job=white", "job=blue", "member=1"]
    assert dataset.rule_features.shape == (4, 5)
    assert dataset.confounders.dtype == float
    np.testing.assert_array_equal(dataset.confounders, dataset.rule_features.astype(float))
    # rerunning the same file yields identical arrays
    again, _, _ = ingest(path, config)
    np.testing.assert_array_equal(again.rule_features, dataset.rule_features)
    np.testing.assert_array_equal(again.y, dataset.y)


@settings(max_examples=60, deadline=None)
@given(
    values=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=4, max_size=200),
    n_bins=st.integers(2, 6),
)
def test_binning_partitions_every_row(values, n_bins):
    arr = np.asarray(values)
    if np.min(arr) == np.max(arr):
        return
    matrix, names = _bin_numeric(Column("v", "numeric", arr), n_bins)
    assert matrix.shape == (len(arr), n_bins)
    np.testing.assert_array_equal(matrix.sum(axis=1), 1)
    assert len(names) == n_bins
    # bin index is monotone in the underlying value
    order = np.argsort(arr, kind="stable")
    bins = matrix.argmax(axis=1)[order]
    assert (np.diff(bins) >= 0).all()
