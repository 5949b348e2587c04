"""Core data model: randomized-trial observations, CSV ingestion, encoding, group counts.

A :class:`Dataset` stores the feature matrix as float64 (categorical columns hold
codes into a per-column category list, missing values are NaN), plus a boolean
treatment-group vector and a binary outcome vector. Datasets are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, EmptyGroupError, ParameterError, SchemaError

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class Group(enum.Enum):
    TREATMENT = "treatment"
    CONTROL = "control"


@dataclass(frozen=True)
class Observation:
    """A single trial row: feature vector, group assignment, binary outcome."""

    features: np.ndarray
    group: Group
    outcome: int


@dataclass(frozen=True)
class GroupCounts:
    """Sufficient statistics of a row subset: sizes and responder counts per group."""

    n_t: int = 0
    n_c: int = 0
    y_t: int = 0
    y_c: int = 0

    def __post_init__(self):
        if not (0 <= self.y_t <= self.n_t and 0 <= self.y_c <= self.n_c):
            raise ValueError(f"inconsistent counts {self}")

    @property
    def n(self) -> int:
        return self.n_t + self.n_c

    def __add__(self, other: "GroupCounts") -> "GroupCounts":
        return GroupCounts(self.n_t + other.n_t, self.n_c + other.n_c,
                           self.y_t + other.y_t, self.y_c + other.y_c)

    def __sub__(self, other: "GroupCounts") -> "GroupCounts":
        return GroupCounts(self.n_t - other.n_t, self.n_c - other.n_c,
                           self.y_t - other.y_t, self.y_c - other.y_c)


def uplift_rate(counts: GroupCounts) -> float:
    """Treatment response rate minus control response rate.

    Multiply by ``counts.n`` to get the group-difference estimator in
    responder-count units.
    """
    if counts.n_t == 0 or counts.n_c == 0:
        raise EmptyGroupError(f"uplift rate undefined: n_t={counts.n_t}, n_c={counts.n_c}")
    return counts.y_t / counts.n_t - counts.y_c / counts.n_c


@dataclass
class Dataset:
    """A schema-carrying randomized-trial sample.

    x           : (n, d) float64 feature matrix; NaN marks a missing value.
    treated     : (n,) bool, True for treatment-group rows.
    outcome     : (n,) uint8 binary outcome.
    feature_kinds: "numeric" or "categorical" per column.
    categories  : for categorical columns, the sorted category strings; the
                  column then holds float codes indexing into that list.
    """

    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    x: np.ndarray
    treated: np.ndarray
    outcome: np.ndarray
    categories: dict[int, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.treated = np.asarray(self.treated, dtype=bool)
        self.outcome = np.asarray(self.outcome, dtype=np.uint8)
        n, d = self.x.shape if self.x.ndim == 2 else (len(self.x), 0)
        if d != len(self.feature_names) or len(self.feature_kinds) != d:
            raise SchemaError("feature matrix width does not match schema")
        if len(self.treated) != n or len(self.outcome) != n:
            raise SchemaError("group/outcome length does not match row count")
        for arr in (self.x, self.treated, self.outcome):
            arr.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.x[:, self.feature_names.index(name)]
        except ValueError:
            raise SchemaError(f"unknown feature {name!r}") from None

    def row(self, i: int) -> Observation:
        return Observation(self.x[i], Group.TREATMENT if self.treated[i] else Group.CONTROL,
                           int(self.outcome[i]))

    def subset(self, mask: np.ndarray) -> "Dataset":
        mask = np.asarray(mask)
        return Dataset(self.feature_names, self.feature_kinds,
                       self.x[mask], self.treated[mask], self.outcome[mask],
                       dict(self.categories))

    def counts(self) -> GroupCounts:
        return group_counts(self)


def group_counts(rows: Dataset | None = None, *, treated: np.ndarray | None = None,
                 outcome: np.ndarray | None = None) -> GroupCounts:
    """Exact group sizes and responder counts for a dataset or raw arrays."""
    if rows is not None:
        treated, outcome = rows.treated, rows.outcome
    treated = np.asarray(treated, dtype=bool)
    outcome = np.asarray(outcome)
    n_t = int(treated.sum())
    y = outcome.astype(np.int64)
    return GroupCounts(n_t=n_t, n_c=int(treated.size - n_t),
                       y_t=int(y[treated].sum()), y_c=int(y[~treated].sum()))


@dataclass(frozen=True)
class CsvConfig:
    """How to map raw CSV columns onto the trial structure.

    group_map sends raw group-column strings to "treatment"/"control";
    group_default, when set, catches any value missing from the map (used e.g.
    to assign every value but one to the treatment arm). outcome_map likewise
    sends raw outcome strings to 0/1. Values in missing_tokens parse as missing.
    """

    group_column: str
    outcome_column: str
    group_map: dict[str, str] = field(default_factory=lambda: {"treatment": "treatment",
                                                               "control": "control"})
    group_default: str | None = None
    outcome_map: dict[str, int] = field(default_factory=lambda: {"0": 0, "1": 1})
    delimiter: str = ","
    missing_tokens: frozenset[str] = frozenset({"", "?", "NA", "nan"})


def _parse_number(token: str) -> float | None:
    try:
        v = float(token)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, config: CsvConfig) -> Dataset:
    """Read a delimited file into a Dataset.

    Column kinds are inferred: numeric if every non-missing value parses as a
    finite number, categorical otherwise. Row order is preserved. Raises
    SchemaError for missing columns and DataError (naming the line) for group
    or outcome values outside the configured mappings.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=config.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = [r for r in reader if r]

    for col in (config.group_column, config.outcome_column):
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r}")
    g_idx = header.index(config.group_column)
    o_idx = header.index(config.outcome_column)
    feat_idx = [i for i in range(len(header)) if i not in (g_idx, o_idx)]
    names = tuple(header[i] for i in feat_idx)

    treated = np.empty(len(rows), dtype=bool)
    outcome = np.empty(len(rows), dtype=np.uint8)
    raw = [[None] * len(rows) for _ in feat_idx]
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"{path}:{r + 2}: expected {len(header)} fields, got {len(row)}")
        g = row[g_idx].strip()
        arm = config.group_map.get(g, config.group_default)
        if arm not in ("treatment", "control"):
            raise DataError(f"{path}:{r + 2}: unmappable group value {g!r}")
        treated[r] = arm == "treatment"
        o = row[o_idx].strip()
        if o not in config.outcome_map:
            raise DataError(f"{path}:{r + 2}: unmappable outcome value {o!r}")
        y = config.outcome_map[o]
        if y not in (0, 1):
            raise DataError(f"{path}:{r + 2}: outcome must map to 0 or 1, got {y}")
        outcome[r] = y
        for j, i in enumerate(feat_idx):
            tok = row[i].strip()
            raw[j][r] = None if tok in config.missing_tokens else tok

    x = np.full((len(rows), len(feat_idx)), np.nan)
    kinds = []
    categories: dict[int, tuple[str, ...]] = {}
    for j, col in enumerate(raw):
        present = [t for t in col if t is not None]
        numbers = [_parse_number(t) for t in present]
        if present and all(v is not None for v in numbers):
            kinds.append(NUMERIC)
            for r, t in enumerate(col):
                if t is not None:
                    x[r, j] = float(t)
        else:
            kinds.append(CATEGORICAL)
            cats = tuple(sorted(set(present)))
            categories[j] = cats
            code = {c: k for k, c in enumerate(cats)}
            for r, t in enumerate(col):
                if t is not None:
                    x[r, j] = code[t]
    return Dataset(names, tuple(kinds), x, treated, outcome, categories)


def write_csv(dataset: Dataset, path, *, group_column: str = "group",
              outcome_column: str = "outcome", treatment_label: str = "treatment",
              control_label: str = "control", delimiter: str = ",") -> None:
    """Write a Dataset back to CSV in a form load_csv round-trips."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(list(dataset.feature_names) + [group_column, outcome_column])
        for r in range(dataset.n_rows):
            row = []
            for j in range(dataset.n_features):
                v = dataset.x[r, j]
                if np.isnan(v):
                    row.append("")
                elif dataset.feature_kinds[j] == CATEGORICAL:
                    row.append(dataset.categories[j][int(v)])
                else:
                    row.append(repr(float(v)))
            row.append(treatment_label if dataset.treated[r] else control_label)
            row.append(str(int(dataset.outcome[r])))
            writer.writerow(row)


def one_hot_encode(dataset: Dataset) -> Dataset:
    """Replace each categorical column with one 0/1 column per category value.

    New columns are named ``<feature>=<value>`` in lexicographic value order.
    Rows missing the source value get 0 in every derived column. Numeric
    columns pass through unchanged; the result is idempotent.
    """
    if CATEGORICAL not in dataset.feature_kinds:
        return dataset
    cols, names = [], []
    for j, kind in enumerate(dataset.feature_kinds):
        if kind == NUMERIC:
            cols.append(dataset.x[:, j])
            names.append(dataset.feature_names[j])
        else:
            codes = dataset.x[:, j]
            for k, cat in enumerate(dataset.categories[j]):
                col = np.where(np.isnan(codes), 0.0, (codes == k).astype(np.float64))
                cols.append(col)
                names.append(f"{dataset.feature_names[j]}={cat}")
    x = np.column_stack(cols) if cols else np.empty((dataset.n_rows, 0))
    return Dataset(tuple(names), (NUMERIC,) * len(names), x,
                   dataset.treated, dataset.outcome, {})


def _tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def distribution_difference(dataset: Dataset, j: int, n_bins: int = 10) -> float:
    """Total variation distance between the two groups' distributions of column j.

    Categorical columns compare category frequencies (missing counts as its own
    category); numeric columns compare frequencies over ``n_bins`` quantile bins
    of the pooled non-missing values. A column observed in only one group is
    maximally different (1.0).
    """
    col = dataset.x[:, j]
    t, c = col[dataset.treated], col[~dataset.treated]
    if dataset.feature_kinds[j] == CATEGORICAL:
        n_cat = len(dataset.categories[j])
        freqs = []
        for side in (t, c):
            if side.size == 0:
                return 1.0
            hist = np.zeros(n_cat + 1)
            codes = side[~np.isnan(side)].astype(int)
            np.add.at(hist, codes, 1.0)
            hist[n_cat] = np.isnan(side).sum()
            freqs.append(hist / side.size)
        return _tv_distance(*freqs)
    t, c = t[~np.isnan(t)], c[~np.isnan(c)]
    if t.size == 0 or c.size == 0:
        return 1.0 if t.size != c.size else 0.0
    pooled = np.concatenate([t, c])
    edges = np.unique(np.quantile(pooled, np.linspace(0, 1, n_bins + 1)))
    if len(edges) < 2:
        return 0.0
    ht, _ = np.histogram(t, bins=edges)
    hc, _ = np.histogram(c, bins=edges)
    return _tv_distance(ht / t.size, hc / c.size)


def distribution_filter(dataset: Dataset, threshold: float) -> Dataset:
    """Drop every feature whose between-group distribution difference exceeds threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ParameterError(f"threshold must be in (0, 1], got {threshold}")
    keep = [j for j in range(dataset.n_features)
            if distribution_difference(dataset, j) <= threshold]
    names = tuple(dataset.feature_names[j] for j in keep)
    kinds = tuple(dataset.feature_kinds[j] for j in keep)
    categories = {k: dataset.categories[j] for k, j in enumerate(keep)
                  if j in dataset.categories}
    x = dataset.x[:, keep] if keep else np.empty((dataset.n_rows, 0))
    return Dataset(names, kinds, x, dataset.treated, dataset.outcome, categories)


def stratified_split(dataset: Dataset, fraction: float, seed: int,
                     by: tuple[str, ...] = ("group", "outcome")) -> tuple[Dataset, Dataset]:
    """Split rows into (first, second) parts of sizes ~fraction/1-fraction.

    Sampling is stratified over the requested keys ("group" and/or "outcome")
    so response rates stay consistent across the parts. Deterministic per seed.
    """
    if not 0.0 < fraction < 1.0:
        raise ParameterError(f"split fraction must be in (0, 1), got {fraction}")
    strata = np.zeros(dataset.n_rows, dtype=np.int64)
    if "group" in by:
        strata = strata * 2 + dataset.treated
    if "outcome" in by:
        strata = strata * 2 + dataset.outcome
    rng = np.random.default_rng(seed)
    first = np.zeros(dataset.n_rows, dtype=bool)
    for s in np.unique(strata):
        idx = np.flatnonzero(strata == s)
        rng.shuffle(idx)
        first[idx[: int(round(fraction * len(idx)))]] = True
    return dataset.subset(first), dataset.subset(~first)
