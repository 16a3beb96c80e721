"""
Validating and correcting a shopping cart
=========================================

The schema carries its business rules in an appinfo block.  Validation
first checks the structure, then evaluates every rule against the
document.
"""
from pathlib import Path

from srml import ValidationOptions, load_schema_and_rules, parse_file, render_report, serialize, validate

data = Path(__file__).parent / "data"
cart = parse_file(data / "cart.xml")
schema, rules = load_schema_and_rules(data / "cart_with_rules.xsd")

print(f"{len(rules.groups)} rule groups:", [d.name for g in rules.groups for d in g.defs])

# report only
report, _ = validate(cart, schema, rules, ValidationOptions(apply_corrections=False))
print(render_report(report).decode())

# correct-mode rules rewrite their targets; later rules see the new value,
# so fixing the tax exposes a wrong total
report, fixed = validate(cart, schema, rules)
print(render_report(report).decode())

book = fixed.root.element_children()[1]
print(serialize(book).decode())

# running again finds nothing left to correct
again, _ = validate(fixed, schema, rules)
print("corrections on second pass:", again.corrections_applied)

# the input document is untouched
print("input unchanged:", cart == parse_file(data / "cart.xml"))
