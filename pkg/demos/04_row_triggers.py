"""
Rules as row-level triggers
===========================

Rows from two CSV tables are joined into a small XML tree around the row
being written, and the same rule language decides whether the write goes
through.
"""
from pathlib import Path

from srml import parse_file, parse_standalone, render_report, serialize
from srml.relational import RowOp, apply_op, build_context, load_csv

data = Path(__file__).parent / "data"
rules = parse_standalone(parse_file(data / "cart_db.srml"))
spec = rules.database
store = load_csv(data / "db", spec)

row = {
    "ID": "3", "CART_ID": "1", "COVER": "hardcover", "AUTHOR": "J.R.R. Tolkien",
    "TITLE": "Lord of the Rings", "ISBN": "1-12345-123-1", "QTY": "5", "PRICE": "100.0",
    "DISCOUNT": "0", "TAX": "125.0", "TOTAL": "1625.0", "REGION": "0",
}

# the tree the rules see for this insert
print(serialize(build_context(store, spec, "book", row)).decode())

# wrong total: blocked, store unchanged
report, after = apply_op(store, spec, rules, RowOp("insert", "book", None, row))
print(render_report(report).decode(), end="")
print("store unchanged:", after is store)

# right total: committed into a new snapshot
report, after = apply_op(store, spec, rules, RowOp("insert", "book", None, {**row, "TOTAL": "1125.0"}))
print(render_report(report).decode(), end="")
print("book rows:", len(store["book"].rows), "->", len(after["book"].rows))

# correct-mode rules fix the written row instead of blocking it
cart = after["cart"].find("1")
report, after = apply_op(after, spec, rules, RowOp("update", "cart", cart, {**cart, "HASDISCOUNT": "false"}))
print(render_report(report).decode(), end="")
print(dict(after["cart"].find("1")))
