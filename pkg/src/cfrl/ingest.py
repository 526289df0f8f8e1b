"""Tabular loading, covariate binarization, and model-ready dataset assembly.

The front door is a JSON ingestion config naming the outcome and treatment
columns and giving one directive per covariate column:

    {
      "outcome": "wage",
      "treatment": "male",
      "columns": [
        {"column": "age",   "kind": "numeric",     "bins": 4},
        {"column": "union", "kind": "categorical", "groups": {"yes": "yes", "no": "no"}},
        {"column": "owns_home", "kind": "binary"}
      ]
    }

Numeric columns are quantile-binned into ``bins`` indicator columns;
categorical columns are mapped level -> group and one indicator is emitted per
group; binary columns pass through unchanged. Output columns are named
``<col>=<bin-or-group>``.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DegenerateBinningError,
    DimensionError,
    ParseError,
    SchemaError,
)

COLUMN_KINDS = ("numeric", "categorical", "binary")

_MISSING_TOKENS = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # one of COLUMN_KINDS
    values: np.ndarray  # float for numeric/binary, object (str) for categorical


@dataclass(frozen=True)
class RawTable:
    """Typed columns of equal length with unique names."""

    columns: tuple

    def __post_init__(self):
        if not self.columns:
            raise SchemaError("table has no columns")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in {names}")
        lengths = {len(c.values) for c in self.columns}
        if len(lengths) != 1:
            raise DimensionError(f"columns have unequal lengths {sorted(lengths)}")
        if self.n_rows == 0:
            raise SchemaError("table has zero rows")

    @property
    def n_rows(self):
        return len(self.columns[0].values)

    @property
    def names(self):
        return [c.name for c in self.columns]

    def column(self, name):
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named {name!r}")

    def select(self, names):
        return RawTable(tuple(self.column(n) for n in names))


@dataclass(frozen=True)
class QuantileBins:
    bins: int

    def __post_init__(self):
        if self.bins < 2:
            raise ConfigError(f"quantile bin count must be >= 2, got {self.bins}")


@dataclass(frozen=True)
class LevelGroups:
    mapping: tuple  # ((level, group), ...) in spec order

    @property
    def groups(self):
        seen = []
        for _, g in self.mapping:
            if g not in seen:
                seen.append(g)
        return seen


@dataclass(frozen=True)
class PassThrough:
    pass


@dataclass(frozen=True)
class BinarizationSpec:
    """One directive per covariate column, keyed by column name."""

    directives: dict = field(default_factory=dict)

    def directive_for(self, name):
        if name not in self.directives:
            raise ConfigError(f"no binarization directive for column {name!r}")
        return self.directives[name]


@dataclass(frozen=True)
class IngestConfig:
    outcome: str
    treatment: str
    kinds: dict  # column name -> kind
    spec: BinarizationSpec

    @property
    def covariates(self):
        return list(self.kinds)


@dataclass(frozen=True)
class BinaryFeatures:
    matrix: np.ndarray  # n_rows x K_b, entries in {0, 1}
    names: list


@dataclass(frozen=True)
class Dataset:
    """The four aligned blocks every downstream stage consumes."""

    rule_features: np.ndarray  # n x K_b in {0,1}
    confounders: np.ndarray  # n x K float
    y: np.ndarray  # n outcomes
    t: np.ndarray  # n treatment indicators in {0,1}

    def __post_init__(self):
        n = len(self.y)
        for label, block in (
            ("rule_features", self.rule_features),
            ("confounders", self.confounders),
            ("treatment", self.t),
        ):
            if block.shape[0] != n:
                raise DimensionError(
                    f"{label} has {block.shape[0]} rows, outcomes have {n}"
                )
        if self.rule_features.ndim != 2 or self.confounders.ndim != 2:
            raise DimensionError("rule_features and confounders must be 2-D")
        if not np.isin(self.rule_features, (0, 1)).all():
            raise DimensionError("rule_features entries must be 0 or 1")
        if not np.isin(self.t, (0, 1)).all():
            raise DimensionError("treatment entries must be 0 or 1")

    @property
    def n_rows(self):
        return len(self.y)

    @property
    def n_confounders(self):
        return self.confounders.shape[1]


def parse_ingest_config(doc):
    """Validate a parsed JSON ingestion config into an IngestConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("ingestion config must be a JSON object")
    for key in ("outcome", "treatment", "columns"):
        if key not in doc:
            raise ConfigError(f"ingestion config missing {key!r}")
    kinds = {}
    directives = {}
    for entry in doc["columns"]:
        name = entry.get("column")
        kind = entry.get("kind")
        if not name or kind not in COLUMN_KINDS:
            raise ConfigError(f"bad column directive {entry!r}")
        if name in kinds:
            raise ConfigError(f"duplicate directive for column {name!r}")
        kinds[name] = kind
        if kind == "numeric":
            if "bins" not in entry:
                raise ConfigError(f"numeric column {name!r} needs 'bins'")
            directives[name] = QuantileBins(int(entry["bins"]))
        elif kind == "categorical":
            groups = entry.get("groups")
            if not isinstance(groups, dict) or not groups:
                raise ConfigError(f"categorical column {name!r} needs 'groups'")
            directives[name] = LevelGroups(tuple((str(k), str(v)) for k, v in groups.items()))
        else:
            directives[name] = PassThrough()
    if doc["outcome"] in kinds or doc["treatment"] in kinds:
        raise ConfigError("outcome/treatment must not appear in 'columns'")
    return IngestConfig(
        outcome=str(doc["outcome"]),
        treatment=str(doc["treatment"]),
        kinds=kinds,
        spec=BinarizationSpec(directives),
    )


def load_ingest_config(path):
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    return parse_ingest_config(doc)


def _is_missing(text):
    return text.strip().lower() in _MISSING_TOKENS


def _parse_number(text, row, column):
    try:
        return float(text)
    except ValueError as exc:
        raise ParseError(f"expected a number, got {text!r}", row=row, column=column) from exc


def _parse_binary(text, row, column):
    value = text.strip().lower()
    if value in ("0", "false", "no"):
        return 0.0
    if value in ("1", "true", "yes"):
        return 1.0
    raise ParseError(f"expected a 0/1 value, got {text!r}", row=row, column=column)


def load_csv(path, config):
    """Read a headered CSV into a typed table, dropping unusable rows.

    Rows missing the outcome or treatment cell are dropped (the count is
    returned); a missing covariate cell is an error, since nothing downstream
    imputes. Columns in the file but not declared are ignored.

    Returns (RawTable of covariates, outcomes array, treatment array, n_dropped).
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        declared = [config.outcome, config.treatment] + config.covariates
        missing = [c for c in declared if c not in header]
        if missing:
            raise SchemaError(f"declared columns absent from {path}: {missing}")
        index = {name: header.index(name) for name in declared}

        covariate_cells = {name: [] for name in config.covariates}
        outcomes, treatments = [], []
        n_dropped = 0
        for row_number, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise ParseError(
                    f"expected {len(header)} cells, got {len(record)}", row=row_number
                )
            y_text = record[index[config.outcome]]
            t_text = record[index[config.treatment]]
            if _is_missing(y_text) or _is_missing(t_text):
                n_dropped += 1
                continue
            outcomes.append(_parse_number(y_text, row_number, config.outcome))
            treatments.append(_parse_binary(t_text, row_number, config.treatment))
            for name in config.covariates:
                text = record[index[name]]
                if _is_missing(text):
                    raise ParseError("missing covariate cell", row=row_number, column=name)
                if config.kinds[name] == "numeric":
                    covariate_cells[name].append(_parse_number(text, row_number, name))
                elif config.kinds[name] == "binary":
                    covariate_cells[name].append(_parse_binary(text, row_number, name))
                else:
                    covariate_cells[name].append(text.strip())

    if not outcomes:
        raise ParseError(f"{path} has no usable rows")
    columns = []
    for name in config.covariates:
        kind = config.kinds[name]
        if kind == "categorical":
            values = np.array(covariate_cells[name], dtype=object)
        else:
            values = np.asarray(covariate_cells[name], dtype=float)
        columns.append(Column(name, kind, values))
    table = RawTable(tuple(columns))
    return table, np.asarray(outcomes), np.asarray(treatments, dtype=np.int8), n_dropped


def _bin_numeric(column, n_bins):
    values = column.values
    if np.min(values) == np.max(values) and n_bins > 1:
        raise DegenerateBinningError(
            f"column {column.name!r} is constant; cannot cut into {n_bins} bins"
        )
    cuts = np.quantile(values, np.arange(1, n_bins) / n_bins)
    # ties at a cut point go to the lower bin: bin k is (cuts[k-1], cuts[k]]
    assignment = np.searchsorted(cuts, values, side="left")
    matrix = np.zeros((len(values), n_bins), dtype=np.int8)
    matrix[np.arange(len(values)), assignment] = 1
    names = [f"{column.name}=q{k + 1}" for k in range(n_bins)]
    return matrix, names


def _bin_categorical(column, directive):
    mapping = dict(directive.mapping)
    observed = set(column.values.tolist())
    unmapped = sorted(observed - set(mapping))
    if unmapped:
        raise SchemaError(
            f"column {column.name!r} has levels not covered by the grouping map: {unmapped}"
        )
    groups = directive.groups
    group_index = {g: i for i, g in enumerate(groups)}
    assignment = np.array([group_index[mapping[v]] for v in column.values.tolist()])
    matrix = np.zeros((len(assignment), len(groups)), dtype=np.int8)
    matrix[np.arange(len(assignment)), assignment] = 1
    names = [f"{column.name}={g}" for g in groups]
    return matrix, names


def binarize(table, spec):
    """Turn every covariate column into indicator columns per its directive.

    Deterministic given (table, spec): quantile cut points come from the data,
    each row of a binned column activates exactly one indicator, and binary
    columns pass through as a single ``<col>=1`` indicator.
    """
    blocks, names = [], []
    for column in table.columns:
        directive = spec.directive_for(column.name)
        if isinstance(directive, QuantileBins):
            if column.kind != "numeric":
                raise ConfigError(f"quantile bins on non-numeric column {column.name!r}")
            block, block_names = _bin_numeric(column, directive.bins)
        elif isinstance(directive, LevelGroups):
            if column.kind != "categorical":
                raise ConfigError(f"level groups on non-categorical column {column.name!r}")
            block, block_names = _bin_categorical(column, directive)
        else:
            if column.kind != "binary":
                raise ConfigError(f"pass-through on non-binary column {column.name!r}")
            block = column.values.astype(np.int8).reshape(-1, 1)
            block_names = [f"{column.name}=1"]
        blocks.append(block)
        names.extend(block_names)
    return BinaryFeatures(np.hstack(blocks), names)


def assemble_dataset(binary, confounders, y, t):
    """Bundle aligned blocks into a Dataset (shares the input arrays)."""
    binary = np.asarray(binary)
    confounders = np.asarray(confounders, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t)
    return Dataset(rule_features=binary, confounders=confounders, y=y, t=t)


def ingest(path, config):
    """CSV -> Dataset with the binarized features reused as confounders.

    Returns (dataset, feature names, dropped row count).
    """
    table, y, t, n_dropped = load_csv(path, config)
    features = binarize(table, config.spec)
    dataset = assemble_dataset(
        features.matrix, features.matrix.astype(float), y, t
    )
    return dataset, features.names, n_dropped
