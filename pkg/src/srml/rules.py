"""SRML 2.0 rule documents as a typed AST.

Elements are recognised by local name, so ``<srml:rule-def>`` and
``<rule-def>`` are equivalent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .errors import PathSyntaxError, RuleSyntaxError, TemplateSyntaxError
from .paths import PathExpr, parse_path
from .schema import SRML_NAMESPACE
from .xmltree import Document, Element, Text, node_location

__all__ = [
    "Data",
    "ValueRef",
    "InstanceValue",
    "CountChildren",
    "BinaryOp",
    "IfExpr",
    "RegEval",
    "ExprAst",
    "RuleInstance",
    "RuleDef",
    "RulesFor",
    "TableSpec",
    "ReferenceSpec",
    "DatabaseSpec",
    "RuleSet",
    "parse_ruleset",
    "parse_standalone",
    "merge_rulesets",
    "ruleset_to_xml",
    "BINARY_OPS",
]

BINARY_OPS = frozenset({"equal", "not-equal", "greater", "greater-equal", "less", "less-equal", "and", "or"})


@dataclass(frozen=True)
class Data:
    literal: str


@dataclass(frozen=True)
class ValueRef:
    path: PathExpr


@dataclass(frozen=True)
class InstanceValue:
    pass


@dataclass(frozen=True)
class CountChildren:
    name: str


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class IfExpr:
    cond: ExprAst
    then: ExprAst
    orelse: ExprAst


@dataclass(frozen=True)
class RegEval:
    template: str
    # parsed form; equality is decided by the template text
    ast: object = field(default=None, compare=False, repr=False)


ExprAst = Union[Data, ValueRef, InstanceValue, CountChildren, BinaryOp, IfExpr, RegEval]


@dataclass(frozen=True)
class RuleInstance:
    message: str
    expr: ExprAst


@dataclass(frozen=True)
class RuleDef:
    target: str
    is_attribute: bool
    instances: tuple[RuleInstance, ...]
    mode: str = "validate"
    match: str = "any"

    @property
    def name(self) -> str:
        return f"@{self.target}" if self.is_attribute else self.target


@dataclass(frozen=True)
class RulesFor:
    root: str
    defs: tuple[RuleDef, ...]


@dataclass(frozen=True)
class TableSpec:
    name: str
    key: str


@dataclass(frozen=True)
class ReferenceSpec:
    root: str
    root_key: str
    child: str
    child_key: str


@dataclass(frozen=True)
class DatabaseSpec:
    tables: tuple[TableSpec, ...]
    references: tuple[ReferenceSpec, ...] = ()

    def table(self, name: str) -> TableSpec:
        for table in self.tables:
            if table.name == name:
                return table
        raise KeyError(name)


@dataclass(frozen=True)
class RuleSet:
    groups: tuple[RulesFor, ...] = ()
    database: DatabaseSpec | None = None


_WS_RUN = re.compile(r"\s+")


def _children(element: Element) -> list[Element]:
    return element.element_children()


def _fail(element: Element, message: str) -> RuleSyntaxError:
    return RuleSyntaxError(message, node_location(element))


def _attr(element: Element, name: str) -> str:
    value = element.attributes.get(name, "").strip()
    if not value:
        raise _fail(element, f"<{element.name}> needs a non-empty {name!r} attribute")
    return value


def _only_text(element: Element) -> str:
    if element.element_children():
        raise _fail(element, f"<{element.name}> must contain only text")
    return element.text_content()


_ATOMS = {"data", "value-ref", "instance-value", "count-children", "binary-op", "if-expr", "reg-eval"}


def _parse_operand(element: Element) -> ExprAst:
    """An operand is an ``expr`` wrapper or a bare expression element."""
    if element.local_name == "expr":
        inner = _children(element)
        if len(inner) != 1:
            stray = "".join(c.text for c in element.children if isinstance(c, Text)).strip()
            detail = f" (stray text {stray!r})" if stray else ""
            raise _fail(element, f"<{element.name}> must contain exactly one expression, found {len(inner)}{detail}")
        return _parse_atom(inner[0])
    if element.local_name in _ATOMS:
        return _parse_atom(element)
    raise _fail(element, f"unknown expression element <{element.name}>")


def _parse_atom(element: Element) -> ExprAst:
    kind = element.local_name
    if kind == "data":
        return Data(_only_text(element).strip())
    if kind == "value-ref":
        try:
            return ValueRef(parse_path(_attr(element, "path")))
        except PathSyntaxError as exc:
            raise _fail(element, f"bad path: {exc}") from None
    if kind == "instance-value":
        if _children(element):
            raise _fail(element, "<instance-value> must be empty")
        return InstanceValue()
    if kind == "count-children":
        return CountChildren(_attr(element, "name"))
    if kind == "binary-op":
        op = _attr(element, "op")
        if op not in BINARY_OPS:
            raise _fail(element, f"unknown binary operator {op!r}")
        operands = _children(element)
        if len(operands) != 2:
            raise _fail(element, f"<binary-op> needs 2 operands, found {len(operands)}")
        return BinaryOp(op, _parse_operand(operands[0]), _parse_operand(operands[1]))
    if kind == "if-expr":
        parts = _children(element)
        if len(parts) != 3:
            raise _fail(element, f"<if-expr> needs condition, then and else, found {len(parts)} children")
        return IfExpr(*(_parse_operand(p) for p in parts))
    if kind == "reg-eval":
        from .expr import parse_template

        template = _only_text(element).strip()
        try:
            return RegEval(template, parse_template(template))
        except TemplateSyntaxError as exc:
            raise _fail(element, f"bad template: {exc}") from None
    raise _fail(element, f"unknown expression element <{element.name}>")


def _parse_instance(element: Element) -> RuleInstance:
    message = ""
    expr: ExprAst | None = None
    for child in _children(element):
        kind = child.local_name
        if kind == "validation-error":
            message = _WS_RUN.sub(" ", _only_text(child)).strip()
        elif kind == "expr":
            if expr is not None:
                raise _fail(child, "<rule-instance> holds more than one <expr>")
            expr = _parse_operand(child)
        else:
            raise _fail(child, f"unexpected <{child.name}> in <rule-instance>")
    if expr is None:
        raise _fail(element, "<rule-instance> has no <expr>")
    return RuleInstance(message, expr)


def _parse_def(element: Element) -> RuleDef:
    name = _attr(element, "name")
    is_attribute = name.startswith("@")
    target = name[1:] if is_attribute else name
    if not target or "/" in target or any(ch.isspace() for ch in target):
        raise _fail(element, f"rule-def target {name!r} must name a direct child or an attribute")
    mode = element.attributes.get("mode", "validate")
    match = element.attributes.get("match", "any")
    if mode not in ("validate", "correct"):
        raise _fail(element, f"unknown mode {mode!r}")
    if match not in ("any", "all"):
        raise _fail(element, f"unknown match {match!r}")
    instances = []
    for child in _children(element):
        if child.local_name != "rule-instance":
            raise _fail(child, f"unexpected <{child.name}> in <rule-def>")
        instances.append(_parse_instance(child))
    if not instances:
        raise _fail(element, f"rule-def {name!r} has no rule-instance")
    return RuleDef(target, is_attribute, tuple(instances), mode, match)


def _parse_rules_for(element: Element) -> RulesFor:
    root = _attr(element, "root")
    defs = []
    for child in _children(element):
        if child.local_name != "rule-def":
            raise _fail(child, f"unexpected <{child.name}> in <rules-for>")
        defs.append(_parse_def(child))
    if not defs:
        raise _fail(element, f"rules-for {root!r} has no rule-def")
    return RulesFor(root, tuple(defs))


def _parse_database(element: Element) -> DatabaseSpec:
    tables: list[TableSpec] = []
    references: list[ReferenceSpec] = []
    for section in _children(element):
        kind = section.local_name
        if kind == "tables":
            for table in _children(section):
                if table.local_name != "table":
                    raise _fail(table, f"unexpected <{table.name}> in <tables>")
                tables.append(TableSpec(_attr(table, "name"), _attr(table, "key")))
        elif kind == "references":
            for ref in _children(section):
                if ref.local_name != "reference":
                    raise _fail(ref, f"unexpected <{ref.name}> in <references>")
                references.append(
                    ReferenceSpec(_attr(ref, "root"), _attr(ref, "root_key"), _attr(ref, "child"), _attr(ref, "child_key"))
                )
        else:
            raise _fail(section, f"unexpected <{section.name}> in <database>")
    names = [t.name for t in tables]
    if len(names) != len(set(names)):
        raise _fail(element, "duplicate table declaration")
    for ref in references:
        for table in (ref.root, ref.child):
            if table not in names:
                raise _fail(element, f"reference names undeclared table {table!r}")
    return DatabaseSpec(tuple(tables), tuple(references))


def parse_ruleset(src: Element) -> RuleSet:
    """Parse a ``srml-def`` element.  Raises :class:`RuleSyntaxError`."""
    if src.local_name != "srml-def":
        raise _fail(src, f"expected <srml-def>, found <{src.name}>")
    groups: list[RulesFor] = []
    database: DatabaseSpec | None = None
    for child in _children(src):
        kind = child.local_name
        if kind == "rules-for":
            groups.append(_parse_rules_for(child))
        elif kind == "database":
            if database is not None:
                raise _fail(child, "only one <database> section is allowed")
            database = _parse_database(child)
        else:
            raise _fail(child, f"unexpected <{child.name}> in <srml-def>")
    if not groups and database is None:
        raise _fail(src, "<srml-def> contains no rules-for and no database section")
    return RuleSet(tuple(groups), database)


def parse_standalone(doc: Document) -> RuleSet:
    return parse_ruleset(doc.root)


def merge_rulesets(rulesets: list[RuleSet]) -> RuleSet:
    groups: list[RulesFor] = []
    database = None
    for ruleset in rulesets:
        groups.extend(ruleset.groups)
        if ruleset.database is not None:
            if database is not None:
                raise RuleSyntaxError("more than one database section across srml-def payloads")
            database = ruleset.database
    return RuleSet(tuple(groups), database)


# canonical printer


def _el(name: str, attrs: dict[str, str] | None = None, *children: Element | str) -> Element:
    element = Element(f"srml:{name}", dict(attrs or {}))
    for child in children:
        element.append(Text(child) if isinstance(child, str) else child)
    return element


def _expr_to_xml(expr: ExprAst) -> Element:
    if isinstance(expr, Data):
        inner = _el("data", None, *([expr.literal] if expr.literal else []))
    elif isinstance(expr, ValueRef):
        inner = _el("value-ref", {"path": str(expr.path)})
    elif isinstance(expr, InstanceValue):
        inner = _el("instance-value")
    elif isinstance(expr, CountChildren):
        inner = _el("count-children", {"name": expr.name})
    elif isinstance(expr, BinaryOp):
        inner = _el("binary-op", {"op": expr.op}, _expr_to_xml(expr.left), _expr_to_xml(expr.right))
    elif isinstance(expr, IfExpr):
        inner = _el("if-expr", None, *(_expr_to_xml(e) for e in (expr.cond, expr.then, expr.orelse)))
    elif isinstance(expr, RegEval):
        inner = _el("reg-eval", None, expr.template)
    else:
        raise TypeError(f"not an expression: {expr!r}")
    return _el("expr", None, inner)


def ruleset_to_xml(ruleset: RuleSet) -> Element:
    """Canonical ``srml:srml-def`` element for ``ruleset``."""
    root = _el("srml-def", {"xmlns:srml": SRML_NAMESPACE})
    for group in ruleset.groups:
        rules_for = root.append(_el("rules-for", {"root": group.root}))
        for rule in group.defs:
            rule_def = rules_for.append(_el("rule-def", {"name": rule.name, "mode": rule.mode, "match": rule.match}))
            for instance in rule.instances:
                rule_def.append(
                    _el(
                        "rule-instance",
                        None,
                        _el("validation-error", None, *([instance.message] if instance.message else [])),
                        _expr_to_xml(instance.expr),
                    )
                )
    if ruleset.database is not None:
        db = root.append(_el("database"))
        tables = db.append(_el("tables"))
        for table in ruleset.database.tables:
            tables.append(_el("table", {"name": table.name, "key": table.key}))
        refs = db.append(_el("references"))
        for ref in ruleset.database.references:
            refs.append(
                _el("reference", {"root": ref.root, "root_key": ref.root_key, "child": ref.child, "child_key": ref.child_key})
            )
    return root
