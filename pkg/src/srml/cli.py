"""Command-line front end.

Exit codes: 0 valid, 1 findings / blocked operation, 2 I/O, parse, schema
or data errors, 3 no embedded rules (``extract-rules``), 64 usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .errors import SrmlError
from .relational import RowOp, apply_op, load_csv, save_table_csv
from .rules import merge_rulesets, parse_ruleset, parse_standalone
from .schema import extract_srml, parse_schema
from .validator import ValidationOptions, render_report, validate_file
from .xmltree import Element, parse_file, serialize

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2
EXIT_NO_RULES = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _stdout(data: bytes) -> None:
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def cmd_validate(args: argparse.Namespace) -> int:
    opts = ValidationOptions(apply_corrections=False, fail_fast=args.fail_fast)
    report, _ = validate_file(args.xml, args.schema, opts)
    _stdout(render_report(report, args.format))
    return EXIT_OK if report.valid else EXIT_FINDINGS


def cmd_correct(args: argparse.Namespace) -> int:
    opts = ValidationOptions(apply_corrections=True, fail_fast=args.fail_fast)
    report, corrected = validate_file(args.xml, args.schema, opts)
    data = serialize(corrected)
    if args.out:
        _write_atomic(Path(args.out), data)
    else:
        _stdout(data)
    sys.stderr.buffer.write(render_report(report, args.format))
    sys.stderr.flush()
    return EXIT_OK if report.valid else EXIT_FINDINGS


def cmd_extract_rules(args: argparse.Namespace) -> int:
    schema = parse_schema(parse_file(args.xsd))
    sources = extract_srml(schema)
    if not sources:
        print(f"no srml-def found in {args.xsd}", file=sys.stderr)
        return EXIT_NO_RULES
    # validate what we emit
    merge_rulesets([parse_ruleset(s) for s in sources])
    first = sources[0]
    combined = Element(first.name, dict(first.attributes))
    for source in sources:
        for key, value in source.attributes.items():
            combined.attributes.setdefault(key, value)
        for child in source.element_children():
            combined.append(child.clone())
    _stdout(serialize(combined))
    return EXIT_OK


def _parse_row(text: str) -> dict[str, str]:
    row: dict[str, str] = {}
    for cell in text.split(","):
        if not cell:
            continue
        name, sep, value = cell.partition("=")
        if not sep or not name:
            raise UsageError(f"--row cell {cell!r} is not of the form column=value")
        if name in row:
            raise UsageError(f"--row names column {name!r} twice")
        row[name] = value
    return row


def cmd_db_apply(args: argparse.Namespace) -> int:
    rules = parse_standalone(parse_file(args.rules))
    if rules.database is None:
        raise SrmlError(f"{args.rules} has no database section")
    spec = rules.database
    store = load_csv(args.data, spec)
    table = store[args.table]
    cells = _parse_row(args.row)
    if table.key not in cells:
        raise UsageError(f"--row must give the key column {table.key!r}")
    key_value = cells[table.key]
    existing = table.find(key_value)
    if args.op == "insert":
        missing = [c for c in table.columns if c not in cells]
        if missing:
            raise UsageError(f"insert needs every column; missing {', '.join(missing)}")
        op = RowOp("insert", args.table, None, cells)
    else:
        if existing is None:
            raise SrmlError(f"no row with {table.key}={key_value!r} in {args.table!r}")
        if args.op == "update":
            unknown = [c for c in cells if c not in table.columns]
            if unknown:
                raise UsageError(f"unknown column(s) {', '.join(unknown)}")
            op = RowOp("update", args.table, existing, {**existing, **cells})
        else:
            op = RowOp("delete", args.table, existing, None)
    opts = ValidationOptions(apply_corrections=args.correct)
    report, new_store = apply_op(store, spec, rules, op, opts)
    if report.valid:
        save_table_csv(new_store, args.data, args.table)
    _stdout(render_report(report, args.format))
    return EXIT_OK if report.valid else EXIT_FINDINGS


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srml", description="Rule-based XML validation and correction.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="report structural and rule findings")
    p.add_argument("xml")
    p.add_argument("--schema", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--fail-fast", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("correct", help="apply correct-mode rules and write the corrected document")
    p.add_argument("xml")
    p.add_argument("--schema", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--fail-fast", action="store_true")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("extract-rules", help="print the SRML rules embedded in a schema")
    p.add_argument("xsd")
    p.set_defaults(func=cmd_extract_rules)

    p = sub.add_parser("db-apply", help="run one row operation through the rule trigger")
    p.add_argument("--data", required=True, help="directory holding <table>.csv files")
    p.add_argument("--rules", required=True, help="standalone srml-def file with a database section")
    p.add_argument("--op", required=True, choices=("insert", "update", "delete"))
    p.add_argument("--table", required=True)
    p.add_argument("--row", required=True, help="column=value,... ")
    p.add_argument("--correct", action="store_true", help="apply correct-mode rules to the row")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_db_apply)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"srml: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SrmlError, OSError) as exc:
        print(f"srml: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
