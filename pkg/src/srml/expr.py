"""Computing expected values from rule expressions.

Values are plain Python objects: ``str``, ``float`` (always finite) and
``bool``.  Arithmetic templates such as
``#(../qty)*#(../price)*(1-#(../discount)/100)`` are parsed by a small
recursive-descent parser into :class:`Const`/:class:`Placeholder`/
:class:`Neg`/:class:`Bin` nodes.
"""

from __future__ import annotations

import decimal
import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import EvalError, NavigationError, PathSyntaxError, TemplateSyntaxError
from .paths import PathExpr, evaluate, parse_path, string_value
from .rules import BinaryOp, CountChildren, Data, ExprAst, IfExpr, InstanceValue, RegEval, ValueRef
from .xmltree import Document, Element

__all__ = [
    "Value",
    "EvalContext",
    "Const",
    "Placeholder",
    "Neg",
    "Bin",
    "parse_template",
    "eval_template",
    "eval_expr",
    "coerce_bool",
    "values_equal",
    "parse_number",
    "format_value",
    "format_number",
    "REL_TOLERANCE",
]

Value = Union[str, float, bool]

REL_TOLERANCE = 1e-9

_DECIMAL = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_TEMPLATE_NUMBER = re.compile(r"[0-9]+(?:\.[0-9]*)?|\.[0-9]+")


@dataclass
class EvalContext:
    context_node: Element
    instance_value: str
    document: Document | None = None


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


@dataclass(frozen=True)
class Const:
    value: float

    def __str__(self) -> str:
        # templates have no exponent syntax
        text = format(decimal.Decimal(repr(self.value)), "f")
        return text[:-2] if text.endswith(".0") else text


@dataclass(frozen=True)
class Placeholder:
    path: PathExpr

    def __str__(self) -> str:
        return f"#({self.path})"


@dataclass(frozen=True)
class Neg:
    operand: ArithAst

    def __str__(self) -> str:
        inner = str(self.operand)
        return f"-({inner})" if isinstance(self.operand, Bin) else f"-{inner}"


@dataclass(frozen=True)
class Bin:
    op: str
    left: ArithAst
    right: ArithAst

    def __str__(self) -> str:
        prec = _PRECEDENCE[self.op]
        left, right = str(self.left), str(self.right)
        if isinstance(self.left, Bin) and _PRECEDENCE[self.left.op] < prec:
            left = f"({left})"
        # right operand needs parens at equal precedence too: a-(b-c), a/(b*c)
        if isinstance(self.right, Bin) and _PRECEDENCE[self.right.op] <= prec:
            right = f"({right})"
        return f"{left}{self.op}{right}"


ArithAst = Union[Const, Placeholder, Neg, Bin]


class _TemplateParser:
    # expr := term (('+'|'-') term)*
    # term := factor (('*'|'/') factor)*
    # factor := number | '(' expr ')' | '#(' path ')' | '-' factor

    def __init__(self, template: str):
        self.src = template
        self.pos = 0

    def fail(self, message: str) -> TemplateSyntaxError:
        return TemplateSyntaxError(message, self.src, self.pos)

    def skip(self) -> None:
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.src[self.pos : self.pos + 1]

    def parse(self) -> ArithAst:
        if not self.src.strip():
            raise self.fail("empty template")
        node = self.expr()
        if self.peek():
            raise self.fail(f"unexpected {self.peek()!r}")
        return node

    def expr(self) -> ArithAst:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.src[self.pos]
            self.pos += 1
            node = Bin(op, node, self.term())
        return node

    def term(self) -> ArithAst:
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.src[self.pos]
            self.pos += 1
            node = Bin(op, node, self.factor())
        return node

    def factor(self) -> ArithAst:
        ch = self.peek()
        if ch == "-":
            self.pos += 1
            return Neg(self.factor())
        if ch == "(":
            self.pos += 1
            node = self.expr()
            if self.peek() != ")":
                raise self.fail("expected ')'")
            self.pos += 1
            return node
        if ch == "#":
            return self.placeholder()
        m = _TEMPLATE_NUMBER.match(self.src, self.pos)
        if m:
            self.pos = m.end()
            return Const(float(m.group()))
        raise self.fail("expected a number, '(' or '#('" if ch else "unexpected end of template")

    def placeholder(self) -> Placeholder:
        if not self.src.startswith("#(", self.pos):
            raise self.fail("expected '#('")
        start = self.pos + 2
        depth, quote, i = 1, "", start
        while i < len(self.src):
            c = self.src[i]
            if quote:
                if c == quote:
                    quote = ""
            elif c in "\"'":
                quote = c
            elif c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
                if depth == 0:
                    break
            i += 1
        else:
            raise self.fail("unterminated '#('")
        raw = self.src[start:i]
        try:
            path = parse_path(raw.strip())
        except PathSyntaxError as exc:
            self.pos = start + exc.offset
            raise self.fail(f"bad path in placeholder: {exc.reason}") from None
        self.pos = i + 1
        return Placeholder(path)


def parse_template(template: str) -> ArithAst:
    return _TemplateParser(template).parse()


def parse_number(value: Value) -> float | None:
    """The numeric reading of ``value``, or None when it is not a decimal literal."""
    if isinstance(value, bool):
        return None
    if isinstance(value, float):
        return value
    text = value.strip()
    if not _DECIMAL.fullmatch(text):
        return None
    number = float(text)
    return number if math.isfinite(number) else None


def _first_string(path: PathExpr, node: Element) -> str:
    try:
        matches = evaluate(path, node)
    except NavigationError as exc:
        raise EvalError("path-unresolved", str(exc)) from None
    if not matches:
        raise EvalError("path-unresolved", f"{path} matched nothing")
    return string_value(matches[0])


def _eval_arith(node: ArithAst, ctx: EvalContext) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Placeholder):
        raw = _first_string(node.path, ctx.context_node)
        number = parse_number(raw)
        if number is None:
            raise EvalError("not-numeric", f"{node.path} resolved to {raw!r}")
        return number
    if isinstance(node, Neg):
        return -_eval_arith(node.operand, ctx)
    left = _eval_arith(node.left, ctx)
    right = _eval_arith(node.right, ctx)
    if node.op == "+":
        result = left + right
    elif node.op == "-":
        result = left - right
    elif node.op == "*":
        result = left * right
    else:
        if right == 0:
            raise EvalError("division-by-zero", f"division by zero in {node}")
        result = left / right
    if not math.isfinite(result):
        raise EvalError("overflow", "arithmetic result is not finite")
    return result


def eval_template(template: str | ArithAst, ctx: EvalContext) -> float:
    ast = parse_template(template) if isinstance(template, str) else template
    return _eval_arith(ast, ctx)


def coerce_bool(value: Value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip() in ("true", "false"):
        return value.strip() == "true"
    raise EvalError("type", f"{value!r} is not a boolean")


def _is_boolish(value: Value) -> bool:
    return isinstance(value, bool) or (isinstance(value, str) and value.strip() in ("true", "false"))


def _numbers_equal(a: float, b: float) -> bool:
    return abs(a - b) <= REL_TOLERANCE * max(1.0, abs(a), abs(b))


def values_equal(a: Value, b: Value) -> bool:
    """Numbers with relative tolerance, then booleans, then exact strings."""
    na, nb = parse_number(a), parse_number(b)
    if na is not None and nb is not None:
        return _numbers_equal(na, nb)
    if _is_boolish(a) and _is_boolish(b):
        return coerce_bool(a) == coerce_bool(b)
    return format_value(a) == format_value(b)


def _compare(op: str, a: Value, b: Value) -> bool:
    if op == "equal":
        return values_equal(a, b)
    if op == "not-equal":
        return not values_equal(a, b)
    na, nb = parse_number(a), parse_number(b)
    if na is None or nb is None:
        raise EvalError("type", f"{op} needs numeric operands, got {a!r} and {b!r}")
    if _numbers_equal(na, nb):
        return op in ("greater-equal", "less-equal")
    if op.startswith("greater"):
        return na > nb
    return na < nb


def eval_expr(expr: ExprAst, ctx: EvalContext) -> Value:
    """Compute the value of ``expr``; never mutates the tree."""
    if isinstance(expr, Data):
        return expr.literal
    if isinstance(expr, InstanceValue):
        return ctx.instance_value
    if isinstance(expr, ValueRef):
        return _first_string(expr.path, ctx.context_node)
    if isinstance(expr, CountChildren):
        return float(sum(1 for c in ctx.context_node.element_children() if c.name == expr.name))
    if isinstance(expr, BinaryOp):
        if expr.op == "and":
            return coerce_bool(eval_expr(expr.left, ctx)) and coerce_bool(eval_expr(expr.right, ctx))
        if expr.op == "or":
            return coerce_bool(eval_expr(expr.left, ctx)) or coerce_bool(eval_expr(expr.right, ctx))
        return _compare(expr.op, eval_expr(expr.left, ctx), eval_expr(expr.right, ctx))
    if isinstance(expr, IfExpr):
        branch = expr.then if coerce_bool(eval_expr(expr.cond, ctx)) else expr.orelse
        return eval_expr(branch, ctx)
    if isinstance(expr, RegEval):
        return eval_template(expr.ast if expr.ast is not None else expr.template, ctx)
    raise TypeError(f"not an expression: {expr!r}")


def format_number(number: float, one_decimal: bool = False) -> str:
    """``625.0`` -> ``"625"`` (or ``"625.0"`` with ``one_decimal``); ``121.5`` -> ``"121.5"``."""
    rounded = round(number)
    if _numbers_equal(number, rounded) and abs(rounded) < 1e16:
        return f"{int(rounded)}.0" if one_decimal else str(int(rounded))
    return format(number, ".12g")


def format_value(value: Value, one_decimal: bool = False) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_number(value, one_decimal)
    return value
