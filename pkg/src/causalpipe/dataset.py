"""Columnar tables: CSV loading, missingness, and baseline descriptives.

A :class:`Table` is a fixed set of named float columns, each either
``continuous`` or ``binary``, with an explicit per-cell missingness mask
(missing cells also hold NaN). Tables are immutable; every operation
returns a new one.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError, ValidationError
from .ranktests import chi2_independence_2x2, mann_whitney_u

logger = logging.getLogger(__name__)

KINDS = ("continuous", "binary")


@dataclass(frozen=True)
class Table:
    names: tuple
    kinds: tuple
    columns: tuple  # float64 arrays, NaN where missing
    missing: tuple  # bool arrays

    def __post_init__(self):
        if not (len(self.names) == len(self.kinds) == len(self.columns) == len(self.missing)):
            raise ValidationError("names, kinds, columns, missing must align")
        if len(set(self.names)) != len(self.names):
            raise ValidationError("duplicate column names")
        lengths = {len(c) for c in self.columns} | {len(m) for m in self.missing}
        if len(lengths) > 1:
            raise ValidationError("columns have unequal lengths")
        for name, kind, col, mask in zip(self.names, self.kinds, self.columns, self.missing):
            if kind not in KINDS:
                raise ValidationError(f"column {name!r}: unknown kind {kind!r}")
            observed = col[~mask]
            if not np.all(np.isfinite(observed)):
                raise ValidationError(f"column {name!r}: non-finite observed value")
            if kind == "binary" and not np.all((observed == 0.0) | (observed == 1.0)):
                raise ValidationError(f"column {name!r}: binary values outside {{0, 1}}")

    @classmethod
    def from_columns(cls, data, kinds):
        """Build from {name: array} and {name: kind} mappings; NaN marks missing."""
        names = tuple(data)
        cols, masks = [], []
        for n in names:
            col = np.asarray(data[n], dtype=np.float64)
            masks.append(np.isnan(col))
            cols.append(col)
        return cls(
            names=names,
            kinds=tuple(kinds[n] for n in names),
            columns=tuple(cols),
            missing=tuple(masks),
        )

    @property
    def n_rows(self):
        return 0 if not self.columns else len(self.columns[0])

    def _index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown column {name!r}") from None

    def column(self, name):
        return self.columns[self._index(name)]

    def mask(self, name):
        return self.missing[self._index(name)]

    def kind(self, name):
        return self.kinds[self._index(name)]

    def is_complete(self):
        return not any(m.any() for m in self.missing)

    def matrix(self, names):
        """Stack the named columns as an (n, k) design block; requires completeness."""
        cols = []
        for n in names:
            if self.mask(n).any():
                raise ValidationError(f"column {n!r} has missing values")
            cols.append(self.column(n))
        return np.column_stack(cols) if cols else np.empty((self.n_rows, 0))

    def select_rows(self, rows):
        rows = np.asarray(rows)
        return Table(
            names=self.names,
            kinds=self.kinds,
            columns=tuple(c[rows] for c in self.columns),
            missing=tuple(m[rows] for m in self.missing),
        )

    def replace_columns(self, updates):
        """New table with some columns replaced by complete float arrays."""
        cols = list(self.columns)
        masks = list(self.missing)
        for name, values in updates.items():
            i = self._index(name)
            values = np.asarray(values, dtype=np.float64)
            cols[i] = values
            masks[i] = np.isnan(values)
        return Table(names=self.names, kinds=self.kinds, columns=tuple(cols), missing=tuple(masks))


@dataclass(frozen=True)
class McarResult:
    variable: str
    chi_square: float
    df: int
    p_value: float
    missing_fraction: float


@dataclass(frozen=True)
class BaselineRow:
    variable: str
    overall: str
    group0: str
    group1: str
    test: str
    p_value: float
    n_overall: int
    n_group0: int
    n_group1: int


def load_table(path, schema):
    """Read a CSV (header required, empty cells missing) against a schema.

    ``schema`` is a sequence of (name, kind) pairs; the header may order
    columns differently and may contain extra columns, which are ignored.
    """
    names = [n for n, _ in schema]
    kinds = {n: k for n, k in schema}
    for n, k in schema:
        if k not in KINDS:
            raise SchemaError(f"column {n!r}: unknown kind {k!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header required") from None
        header = [h.strip() for h in header]
        position = {}
        for n in names:
            if n not in header:
                raise SchemaError(f"{path}: missing column {n!r}")
            position[n] = header.index(n)
        raw = {n: [] for n in names}
        for rownum, record in enumerate(reader, start=2):
            for n in names:
                idx = position[n]
                cell = record[idx].strip() if idx < len(record) else ""
                if cell == "" or cell.upper() == "NA":
                    raw[n].append(np.nan)
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise SchemaError(
                        f"{path}: line {rownum}, column {n!r}: non-numeric cell {cell!r}"
                    ) from None
                if kinds[n] == "binary" and value not in (0.0, 1.0):
                    raise SchemaError(
                        f"{path}: line {rownum}, column {n!r}: binary value {cell!r} not in {{0, 1}}"
                    )
                raw[n].append(value)
    data = {n: np.asarray(raw[n], dtype=np.float64) for n in names}
    table = Table.from_columns(data, kinds)
    logger.info("loaded %s: %d rows, %d columns", path, table.n_rows, len(names))
    return table


def mcar_test(table, variable, outcome):
    """Chi-square test of missingness against a binary outcome (df=1, no correction)."""
    miss = table.mask(variable)
    if not miss.any():
        raise ValidationError(f"column {variable!r} has no missing values")
    if miss.all():
        raise ValidationError(f"column {variable!r} has no observed values")
    if table.mask(outcome).any():
        raise ValidationError(f"outcome {outcome!r} has missing values")
    if table.kind(outcome) != "binary":
        raise ValidationError(f"outcome {outcome!r} must be binary")
    y = table.column(outcome)
    counts = np.array(
        [
            [np.sum(miss & (y == 1.0)), np.sum(miss & (y == 0.0))],
            [np.sum(~miss & (y == 1.0)), np.sum(~miss & (y == 0.0))],
        ]
    )
    stat, p = chi2_independence_2x2(counts)
    return McarResult(
        variable=variable,
        chi_square=stat,
        df=1,
        p_value=p,
        missing_fraction=float(miss.mean()),
    )


def complete_cases(table):
    """Drop every row containing at least one missing cell; order preserved."""
    if not table.missing:
        return table
    any_missing = np.zeros(table.n_rows, dtype=bool)
    for m in table.missing:
        any_missing |= m
    return table.select_rows(np.nonzero(~any_missing)[0])


def impute_iterative(table, iterations=10, seed=None):
    """Fill missing cells by round-robin chained regression.

    Observed cells are untouched. See
    :class:`causalpipe.impute.ChainedEquationsImputer` for the procedure.
    """
    from .impute import ChainedEquationsImputer

    if table.is_complete():
        return table
    X = np.column_stack(table.columns) if table.columns else np.empty((0, 0))
    imputer = ChainedEquationsImputer(kinds=table.kinds, iterations=iterations, seed=seed)
    filled = imputer.fit_transform(X)
    return Table(
        names=table.names,
        kinds=table.kinds,
        columns=tuple(filled[:, j].copy() for j in range(filled.shape[1])),
        missing=tuple(np.zeros(table.n_rows, dtype=bool) for _ in table.names),
    )


def _fmt_mean_sd(values):
    return f"{np.mean(values):.1f}±{np.std(values, ddof=1):.1f}"


def _fmt_count_pct(values):
    n = int(np.sum(values == 1.0))
    pct = 100.0 * n / len(values) if len(values) else 0.0
    return f"{n:,} ({pct:.1f}%)"


def summarize_baseline(table, group, variables):
    """Descriptive rows by a binary grouping column.

    Continuous variables get mean(SD) and a Mann-Whitney p; binary get
    n (%) and a chi-square p. Missing cells are excluded from summaries.
    """
    if table.mask(group).any():
        raise ValidationError(f"group column {group!r} has missing values")
    g = table.column(group)
    rows = []
    for var in variables:
        col = table.column(var)
        obs = ~table.mask(var)
        v0 = col[obs & (g == 0.0)]
        v1 = col[obs & (g == 1.0)]
        v_all = col[obs]
        if table.kind(var) == "continuous":
            _, p = mann_whitney_u(v1, v0)
            overall, s0, s1 = _fmt_mean_sd(v_all), _fmt_mean_sd(v0), _fmt_mean_sd(v1)
            test = "mann_whitney_u"
        else:
            counts = np.array(
                [
                    [np.sum(v1 == 1.0), np.sum(v1 == 0.0)],
                    [np.sum(v0 == 1.0), np.sum(v0 == 0.0)],
                ]
            )
            _, p = chi2_independence_2x2(counts)
            overall, s0, s1 = _fmt_count_pct(v_all), _fmt_count_pct(v0), _fmt_count_pct(v1)
            test = "chi_square"
        rows.append(
            BaselineRow(
                variable=var,
                overall=overall,
                group0=s0,
                group1=s1,
                test=test,
                p_value=float(p),
                n_overall=int(table.n_rows),
                n_group0=int(np.sum(g == 0.0)),
                n_group1=int(np.sum(g == 1.0)),
            )
        )
    return rows
