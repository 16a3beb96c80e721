"""Row-level validation of table data through SRML rules.

Tables are kept in memory as immutable snapshots.  For every insert, update
or delete a small context tree is assembled from the rows related to the
subject row through the declared references, and the rules are run over
that tree as if it were a standalone document.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .errors import ContextError, CycleError, IngestError, RuleSyntaxError
from .rules import DatabaseSpec, ReferenceSpec, RuleSet
from .validator import ValidationOptions, ValidationReport, apply_rules
from .xmltree import Document, Element

__all__ = [
    "Row",
    "Table",
    "TableStore",
    "RowOp",
    "load_csv",
    "save_table_csv",
    "build_context",
    "fire_trigger",
    "apply_op",
    "check_relational_rules",
]

Row = Mapping[str, str]


def _freeze(row: Mapping[str, str]) -> Row:
    return MappingProxyType(dict(row))


@dataclass(frozen=True)
class Table:
    name: str
    key: str
    columns: tuple[str, ...]
    rows: tuple[Row, ...] = ()

    def find(self, key_value: str) -> Row | None:
        for row in self.rows:
            if row[self.key] == key_value:
                return row
        return None


@dataclass(frozen=True)
class TableStore:
    tables: Mapping[str, Table] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Table:
        try:
            return self.tables[name]
        except KeyError:
            raise ContextError(f"unknown table {name!r}") from None

    def with_row(self, table_name: str, row: Mapping[str, str]) -> TableStore:
        """New store with ``row`` replacing the row of the same key, or appended."""
        table = self[table_name]
        if table.key not in row:
            raise ContextError(f"row for {table_name!r} lacks key column {table.key!r}")
        if set(row) != set(table.columns):
            raise ContextError(
                f"row columns {sorted(row)} do not match table {table_name!r} columns {sorted(table.columns)}"
            )
        ordered = _freeze({c: row[c] for c in table.columns})
        rows = list(table.rows)
        for i, existing in enumerate(rows):
            if existing[table.key] == row[table.key]:
                rows[i] = ordered
                break
        else:
            rows.append(ordered)
        return self._replace(replace(table, rows=tuple(rows)))

    def without_row(self, table_name: str, key_value: str) -> TableStore:
        table = self[table_name]
        rows = tuple(r for r in table.rows if r[table.key] != key_value)
        if len(rows) == len(table.rows):
            raise ContextError(f"no row with {table.key}={key_value!r} in {table_name!r}")
        return self._replace(replace(table, rows=rows))

    def _replace(self, table: Table) -> TableStore:
        tables = dict(self.tables)
        tables[table.name] = table
        return TableStore(MappingProxyType(tables))


@dataclass(frozen=True)
class RowOp:
    kind: str  # "insert" | "update" | "delete"
    table: str
    old_row: Row | None = None
    new_row: Row | None = None

    def __post_init__(self) -> None:
        if self.kind == "insert" and (self.old_row is not None or self.new_row is None):
            raise ValueError("insert needs new_row only")
        if self.kind == "update" and (self.old_row is None or self.new_row is None):
            raise ValueError("update needs old_row and new_row")
        if self.kind == "delete" and (self.old_row is None or self.new_row is not None):
            raise ValueError("delete needs old_row only")
        if self.kind not in ("insert", "update", "delete"):
            raise ValueError(f"unknown operation {self.kind!r}")


def load_csv(directory: str | Path, spec: DatabaseSpec) -> TableStore:
    """Read ``<table>.csv`` for every declared table; all cells stay strings."""
    directory = Path(directory)
    tables: dict[str, Table] = {}
    for table_spec in spec.tables:
        path = directory / f"{table_spec.name}.csv"
        try:
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                records = list(reader)
        except OSError as exc:
            raise IngestError(f"cannot read {path}: {exc.strerror}") from None
        if not header:
            raise IngestError(f"{path} has no header row")
        if table_spec.key not in header:
            raise IngestError(f"{path} lacks key column {table_spec.key!r}")
        if len(set(header)) != len(header):
            raise IngestError(f"{path} has duplicate column names")
        rows: list[Row] = []
        seen: set[str] = set()
        for line_no, record in enumerate(records, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise IngestError(f"{path}:{line_no}: expected {len(header)} cells, found {len(record)}")
            row = dict(zip(header, record))
            key_value = row[table_spec.key]
            if key_value in seen:
                raise IngestError(f"{path}:{line_no}: duplicate key {table_spec.key}={key_value!r}")
            seen.add(key_value)
            rows.append(_freeze(row))
        tables[table_spec.name] = Table(table_spec.name, table_spec.key, tuple(header), tuple(rows))
    return TableStore(MappingProxyType(tables))


def save_table_csv(store: TableStore, directory: str | Path, table_name: str) -> None:
    """Rewrite ``<table>.csv`` atomically (temp file + rename)."""
    table = store[table_name]
    directory = Path(directory)
    fd, tmp = tempfile.mkstemp(prefix=f".{table_name}.", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([row[c] for c in table.columns])
        os.replace(tmp, directory / f"{table_name}.csv")
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parent_reference(spec: DatabaseSpec, table: str) -> ReferenceSpec | None:
    refs = [r for r in spec.references if r.child == table]
    if len(refs) > 1:
        raise ContextError(f"table {table!r} has more than one parent reference; references must form a forest")
    return refs[0] if refs else None


def _check_acyclic(spec: DatabaseSpec) -> None:
    children: dict[str, list[str]] = {}
    for ref in spec.references:
        children.setdefault(ref.root, []).append(ref.child)
    state: dict[str, int] = {}

    def visit(table: str, trail: list[str]) -> None:
        if state.get(table) == 1:
            raise CycleError("reference cycle: " + " -> ".join(trail + [table]))
        if state.get(table) == 2:
            return
        state[table] = 1
        for child in children.get(table, []):
            visit(child, trail + [table])
        state[table] = 2

    for table in list(children):
        visit(table, [])


def _root_row(store: TableStore, spec: DatabaseSpec, table: str, row: Row) -> tuple[str, Row]:
    while True:
        ref = _parent_reference(spec, table)
        if ref is None:
            return table, row
        if ref.child_key not in row:
            raise ContextError(f"row of {table!r} lacks reference column {ref.child_key!r}")
        wanted = row[ref.child_key]
        parent = next((r for r in store[ref.root].rows if r.get(ref.root_key) == wanted), None)
        if parent is None:
            raise ContextError(f"{table}.{ref.child_key}={wanted!r} has no matching {ref.root}.{ref.root_key}")
        table, row = ref.root, parent


def _subtree(store: TableStore, spec: DatabaseSpec, table: str, row: Row, index: dict) -> Element:
    element = Element(table, dict(row))
    index[(table, row[store[table].key])] = element
    for ref in spec.references:
        if ref.root != table:
            continue
        for child_row in store[ref.child].rows:
            if child_row.get(ref.child_key) == row.get(ref.root_key):
                element.append(_subtree(store, spec, ref.child, child_row, index))
    return element


def _context(store: TableStore, spec: DatabaseSpec, table: str, row: Row) -> tuple[Document, dict]:
    _check_acyclic(spec)
    root_table, root_row = _root_row(store, spec, table, row)
    index: dict[tuple[str, str], Element] = {}
    root = _subtree(store, spec, root_table, root_row, index)
    return Document(root, f"<context {table}>"), index


def build_context(store: TableStore, spec: DatabaseSpec, table: str, row: Mapping[str, str]) -> Document:
    """The context tree around ``row``, which takes part with the given values."""
    hypothetical = store.with_row(table, row)
    return _context(hypothetical, spec, table, hypothetical[table].find(row[store[table].key]))[0]


def check_relational_rules(rules: RuleSet) -> None:
    for group in rules.groups:
        for rule in group.defs:
            if not rule.is_attribute:
                raise RuleSyntaxError(
                    f"relational-restriction: rule-def {rule.name!r} under rules-for {group.root!r} "
                    "must target a column attribute (@name)"
                )


def fire_trigger(
    store: TableStore,
    spec: DatabaseSpec,
    rules: RuleSet,
    op: RowOp,
    opts: ValidationOptions | None = None,
) -> tuple[ValidationReport, Row | None]:
    """Validate ``op`` against the rules without touching ``store``.

    Returns the report and, when correct-mode rules rewrote the subject row,
    the corrected row.
    """
    check_relational_rules(rules)
    opts = replace(opts or ValidationOptions(), decimal_numbers=True)
    table = store[op.table]

    if op.kind == "delete":
        key_value = op.old_row[table.key]
        if table.find(key_value) is None:
            raise ContextError(f"no row with {table.key}={key_value!r} in {op.table!r}")
        ref = _parent_reference(spec, op.table)
        report = ValidationReport()
        if ref is None:
            return report, None
        post = store.without_row(op.table, key_value)
        parent = next((r for r in post[ref.root].rows if r.get(ref.root_key) == op.old_row.get(ref.child_key)), None)
        if parent is None:
            return report, None
        doc, index = _context(post, spec, ref.root, parent)
        anchor = index[(ref.root, parent[post[ref.root].key])]
        scope = []
        while anchor is not None:
            scope.append(anchor)
            anchor = anchor.parent
        apply_rules(doc, rules, opts, report, scope=scope, may_correct=lambda _: False)
        return report, None

    new_row = op.new_row
    if table.key not in new_row:
        raise ContextError(f"row for {op.table!r} lacks key column {table.key!r}")
    key_value = new_row[table.key]
    existing = table.find(key_value)
    if op.kind == "insert" and existing is not None:
        raise ContextError(f"duplicate key {table.key}={key_value!r} in {op.table!r}")
    if op.kind == "update":
        if op.old_row.get(table.key) != key_value:
            raise ContextError("update must not change the key value")
        if existing is None:
            raise ContextError(f"no row with {table.key}={key_value!r} in {op.table!r}")
    post = store.with_row(op.table, new_row)
    doc, index = _context(post, spec, op.table, post[op.table].find(key_value))
    subject = index[(op.table, key_value)]
    report = ValidationReport()
    apply_rules(doc, rules, opts, report, scope=[subject], may_correct=lambda e: e is subject)
    corrected = None
    if report.corrections_applied:
        corrected = _freeze({c: subject.attributes[c] for c in post[op.table].columns})
    return report, corrected


def apply_op(
    store: TableStore,
    spec: DatabaseSpec,
    rules: RuleSet,
    op: RowOp,
    opts: ValidationOptions | None = None,
) -> tuple[ValidationReport, TableStore]:
    """Commit ``op`` to a new store when the trigger accepts it."""
    report, corrected = fire_trigger(store, spec, rules, op, opts)
    if not report.valid:
        return report, store
    if op.kind == "delete":
        return report, store.without_row(op.table, op.old_row[store[op.table].key])
    return report, store.with_row(op.table, corrected if corrected is not None else op.new_row)
