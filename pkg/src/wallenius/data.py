"""Datasets of urn tables, their CSV schema, and canonical result files.

Dataset CSV (long form, UTF-8, ``.`` decimal point)::

    table_id,category,m,x
    t0001,A,10,3
    t0001,B,10,2

One row per (table, category).  Every table lists the same categories in
the same order.  Chain CSV: ``iter,w_1,...,w_K,log_post``.
"""

import csv
from dataclasses import dataclass, fields, is_dataclass
from functools import cached_property
import json
import math
from pathlib import Path

import numpy as np

from .core import DrawOutcome, UrnSpec, WeightVector, mix64, simulate_draws
from .exceptions import DomainError, ParseError, ValidationError

__all__ = [
    "SHARED",
    "PER_UNIT",
    "Table",
    "Dataset",
    "parse_dataset",
    "write_dataset",
    "simulate_dataset",
    "to_record",
    "dumps_results",
    "write_results",
    "write_chain_csv",
    "read_chain_csv",
]

SHARED = "shared_weights"
PER_UNIT = "per_unit_weights"
BINDINGS = (SHARED, PER_UNIT)
DATASET_HEADER = ("table_id", "category", "m", "x")
SIGNIFICANT_DIGITS = 12


@dataclass(frozen=True)
class Table:
    table_id: str
    urn: UrnSpec
    outcome: DrawOutcome

    @property
    def n(self):
        return self.outcome.n

    @property
    def informative(self):
        """True when the draw is neither empty nor exhausts the urn."""
        return 0 < self.outcome.n < self.urn.total


@dataclass(frozen=True)
class Dataset:
    """Tables sharing one category structure.

    With ``binding == SHARED`` one weight vector governs every table; with
    ``PER_UNIT`` each table is a separate unit with its own weights, and
    analyses run unit by unit (see :meth:`units`).
    """

    tables: tuple
    binding: str = SHARED
    labels: tuple = None

    def __post_init__(self):
        tables = tuple(self.tables)
        if not tables:
            raise ValidationError("dataset has no tables")
        if self.binding not in BINDINGS:
            raise ValidationError(f"binding must be one of {BINDINGS}, got {self.binding!r}")
        labels = tuple(self.labels) if self.labels is not None else tables[0].urn.labels
        seen = set()
        for t in tables:
            if t.table_id in seen:
                raise ValidationError(f"duplicate table_id {t.table_id!r}")
            seen.add(t.table_id)
            if t.urn.K != len(labels) or t.outcome.K != len(labels):
                raise ValidationError(
                    f"table {t.table_id!r} has {t.urn.K} categories, expected {len(labels)}")
            if t.urn.labels != labels:
                raise ValidationError(
                    f"table {t.table_id!r} categories {t.urn.labels} differ from {labels}")
            for label, m, x in zip(labels, t.urn.counts, t.outcome.x):
                if x > m:
                    raise ValidationError(
                        f"table {t.table_id!r}, category {label!r}: drew {x} of {m} balls")
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_arrays(cls, counts, draws, labels=None, binding=SHARED, table_ids=None):
        """Build a dataset from per-table count and draw rows."""
        counts = np.atleast_2d(counts)
        draws = np.atleast_2d(draws)
        if counts.shape[0] == 1 and draws.shape[0] > 1:
            counts = np.repeat(counts, draws.shape[0], axis=0)
        if counts.shape != draws.shape:
            raise DomainError(f"counts {counts.shape} and draws {draws.shape} differ in shape")
        if table_ids is None:
            table_ids = [f"t{i + 1:04d}" for i in range(counts.shape[0])]
        if labels is not None:
            labels = tuple(labels)
        tables = [Table(tid, UrnSpec(tuple(m), labels), DrawOutcome(tuple(x)))
                  for tid, m, x in zip(table_ids, counts.tolist(), draws.tolist())]
        return cls(tuple(tables), binding=binding)

    @property
    def K(self):
        return len(self.labels)

    def __len__(self):
        return len(self.tables)

    def __iter__(self):
        return iter(self.tables)

    @property
    def informative(self):
        return any(t.informative for t in self.tables)

    @cached_property
    def _distinct(self):
        groups = {}
        for t in self.tables:
            key = (t.urn.counts, t.outcome.x)
            groups[key] = groups.get(key, 0) + 1
        counts = np.array([k[0] for k in groups], dtype=np.float64).reshape(len(groups), self.K)
        draws = np.array([k[1] for k in groups], dtype=np.float64).reshape(len(groups), self.K)
        mult = np.array(list(groups.values()), dtype=np.float64)
        for arr in (counts, draws, mult):
            arr.setflags(write=False)
        return counts, draws, mult

    def distinct_tables(self):
        """Unique (counts, draws) rows in first-appearance order and their multiplicities."""
        return self._distinct

    def counts_array(self):
        return np.array([t.urn.counts for t in self.tables])

    def draws_array(self):
        return np.array([t.outcome.x for t in self.tables])

    def units(self):
        """One single-table dataset per table."""
        return [Dataset((t,), binding=SHARED) for t in self.tables]

    def permuted(self, order):
        """Dataset with categories reordered as ``order``."""
        order = list(order)
        labels = tuple(self.labels[i] for i in order)
        tables = tuple(
            Table(t.table_id, UrnSpec(tuple(t.urn.counts[i] for i in order), labels),
                  DrawOutcome(tuple(t.outcome.x[i] for i in order)))
            for t in self.tables)
        return Dataset(tables, binding=self.binding)

    def duplicated(self, times=2):
        """Dataset with every table repeated ``times`` times (fresh ids)."""
        tables = tuple(Table(f"{t.table_id}_{r}", t.urn, t.outcome)
                       for r in range(times) for t in self.tables)
        return Dataset(tables, binding=self.binding)


def _parse_count(text, what, line):
    try:
        value = int(text.strip())
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {text!r}", line) from None
    if value < 0:
        raise ParseError(f"{what} must be nonnegative, got {value}", line)
    return value


def parse_dataset(path, binding=SHARED, delimiter=","):
    """Read a long-form dataset CSV and validate it."""
    rows = {}
    order = []
    last_id = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file", 1)
        if tuple(h.strip() for h in header) != DATASET_HEADER:
            raise ParseError(f"header must be {','.join(DATASET_HEADER)}, got {','.join(header)}", 1)
        for record in reader:
            line = reader.line_num
            if not record or all(not f.strip() for f in record):
                continue
            if len(record) != 4:
                raise ParseError(f"expected 4 fields, got {len(record)}", line)
            table_id, category = record[0].strip(), record[1].strip()
            if not table_id or not category:
                raise ParseError("table_id and category must be non-empty", line)
            m = _parse_count(record[2], "m", line)
            x = _parse_count(record[3], "x", line)
            if table_id != last_id:
                if table_id in rows:
                    raise ParseError(f"duplicate table_id {table_id!r}", line)
                rows[table_id] = []
                order.append(table_id)
                last_id = table_id
            if any(c == category for c, _, _, _ in rows[table_id]):
                raise ParseError(f"category {category!r} repeated in table {table_id!r}", line)
            rows[table_id].append((category, m, x, line))
    if not order:
        raise ParseError("no data rows", 2)

    labels = tuple(c for c, _, _, _ in rows[order[0]])
    tables = []
    for table_id in order:
        entries = rows[table_id]
        cats = tuple(c for c, _, _, _ in entries)
        if cats != labels:
            raise ParseError(
                f"table {table_id!r} has categories {cats}, expected {labels}", entries[0][3])
        for category, m, x, line in entries:
            if x > m:
                raise ValidationError(
                    f"line {line}: table {table_id!r}, category {category!r}: drew {x} of {m} balls")
        counts = tuple(m for _, m, _, _ in entries)
        if sum(counts) < 1:
            raise ValidationError(f"table {table_id!r} has an empty urn")
        tables.append(Table(table_id, UrnSpec(counts, labels),
                            DrawOutcome(tuple(x for _, _, x, _ in entries))))
    return Dataset(tuple(tables), binding=binding)


def write_dataset(dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DATASET_HEADER)
        for t in dataset.tables:
            for label, m, x in zip(dataset.labels, t.urn.counts, t.outcome.x):
                writer.writerow((t.table_id, label, m, x))


def simulate_dataset(urn, w, n, T, seed, binding=SHARED):
    """``T`` tables of ``n`` draws each; table ``t`` uses seed ``mix64(seed, t)``."""
    if not isinstance(w, WeightVector):
        w = WeightVector(w)
    T = int(T)
    if T < 1:
        raise DomainError(f"need at least one table, got T={T}")
    tables = []
    for t in range(T):
        x = simulate_draws(urn, w, n, 1, mix64(seed, t))[0]
        tables.append(Table(f"t{t + 1:04d}", urn, DrawOutcome(tuple(x.tolist()))))
    return Dataset(tuple(tables), binding=binding)


def _round_float(x):
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def to_record(obj):
    """Convert results into JSON-ready builtins with floats at 12 significant digits."""
    if hasattr(obj, "to_dict"):
        return to_record(obj.to_dict())
    if isinstance(obj, WeightVector):
        return [_round_float(v) for v in obj.tolist()]
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_record(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_record(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_record(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_record(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round_float(float(obj))
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_results(record):
    """Canonical JSON text: sorted keys, fixed float precision, trailing newline."""
    return json.dumps(to_record(record), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_results(record, path):
    Path(path).write_text(dumps_results(record), encoding="utf-8")


def write_chain_csv(chain, path):
    """One row per retained iteration: ``iter,w_1..w_K,log_post``."""
    samples = np.asarray(chain.samples)
    K = samples.shape[1]
    start = chain.config.burn_in + 1
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(["iter"] + [f"w_{i + 1}" for i in range(K)] + ["log_post"]) + "\n")
        for i, (row, lp) in enumerate(zip(samples.tolist(), chain.log_post.tolist())):
            fh.write(",".join([str(start + i)] + [repr(v) for v in row] + [repr(lp)]) + "\n")


def read_chain_csv(path):
    """Return ``(iterations, samples, log_post)`` arrays from a chain CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "iter" or header[-1] != "log_post":
            raise ParseError(f"not a chain file header: {','.join(header)}", 1)
        data = np.array([[float(v) for v in row] for row in reader if row])
    if data.size == 0:
        data = data.reshape(0, len(header))
    return data[:, 0].astype(np.int64), data[:, 1:-1], data[:, -1]
