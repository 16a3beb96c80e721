import math
import random

import pytest
from hypothesis import given, strategies as st

from srml.errors import EvalError, TemplateSyntaxError
from srml.paths import parse_path
from srml.expr import (
    Bin,
    Const,
    EvalContext,
    Neg,
    Placeholder,
    coerce_bool,
    eval_expr,
    eval_template,
    format_number,
    parse_template,
    values_equal,
)
from srml.paths import evaluate, parse_path
from srml.rules import BinaryOp, Data, ValueRef
from srml.xmltree import Element, Text, parse_document

from .oracles import book_total

TEMPLATE = "#(../qty)*#(../price)*(1-#(../discount)/100)*(1+#(../tax)/100)"


def child(doc, path):
    return evaluate(path, doc.root)[0]


def ctx_for(element, attribute=None):
    found = element.attributes[attribute] if attribute else element.text_content().strip()
    return EvalContext(element, found)


def book_element(qty, price, discount, tax, total="0"):
    book = Element("book")
    for name, value in (("qty", qty), ("price", price), ("discount", discount), ("tax", tax), ("total", total)):
        book.append(Element(name)).append(Text(str(value)))
    return book


def test_discount_flag_on_cart(cart_doc, cart_rules):
    expr = cart_rules.groups[0].defs[0].instances[0].expr
    assert eval_expr(expr, ctx_for(cart_doc.root, "hasDiscount")) == "false"


def test_tolkien_discount(cart_doc, cart_rules):
    expr = cart_rules.groups[1].defs[0].instances[0].expr
    assert eval_expr(expr, ctx_for(child(cart_doc, "/cart/book[1]/discount"))) == "20"
    assert eval_expr(expr, ctx_for(child(cart_doc, "/cart/book[2]/discount"))) == "10"


def test_digital_tax(cart_doc, cart_rules):
    expr = cart_rules.groups[2].defs[0].instances[0].expr
    assert eval_expr(expr, ctx_for(child(cart_doc, "/cart/book[2]/tax"))) == "0"
    assert eval_expr(expr, ctx_for(child(cart_doc, "/cart/book[1]/tax"))) == "25"


def test_totals(cart_doc):
    first = child(cart_doc, "/cart/book[1]/total")
    second = child(cart_doc, "/cart/book[2]/total")
    assert eval_template(TEMPLATE, ctx_for(first)) == pytest.approx(625, rel=1e-12)
    assert eval_template(TEMPLATE, ctx_for(second)) == pytest.approx(121.5, rel=1e-12)
    assert values_equal(eval_template(TEMPLATE, ctx_for(second)), "121.5")


def test_inserted_row_total():
    book = book_element("5", "100.0", "0", "125.0", "1625.0")
    total = book.element_children()[-1]
    assert eval_template(TEMPLATE, ctx_for(total)) == 1125.0


def test_template_parse_shape():
    assert parse_template("1-2-3") == Bin("-", Bin("-", Const(1), Const(2)), Const(3))
    assert parse_template("2*-#(@a)") == Bin("*", Const(2), Neg(Placeholder(parse_path("@a"))))
    assert parse_template(" ( 1 + 2 ) / 4 ") == Bin("/", Bin("+", Const(1), Const(2)), Const(4))


def test_placeholder_may_contain_parentheses():
    doc = parse_document(b'<r><v k=")">4</v><w><t>3</t></w></r>')
    w = doc.root.element_children()[1]
    assert eval_template('#(../v[@k=")"])*#(t/text())', EvalContext(w, "")) == 12


@pytest.mark.parametrize("bad", ["", "1+", "#(../x", "(1", "1 2", "#(count(x))", "a*2", "1..2"])
def test_template_syntax_errors(bad):
    with pytest.raises(TemplateSyntaxError):
        parse_template(bad)


def test_template_runtime_errors():
    book = book_element("x", "1", "0", "0")
    total = book.element_children()[-1]
    with pytest.raises(EvalError) as info:
        eval_template("#(../qty)", ctx_for(total))
    assert info.value.kind == "not-numeric"
    with pytest.raises(EvalError) as info:
        eval_template("#(../missing)", ctx_for(total))
    assert info.value.kind == "path-unresolved"
    with pytest.raises(EvalError) as info:
        eval_template("1/(#(../discount)-0)", ctx_for(total))
    assert info.value.kind == "division-by-zero"
    with pytest.raises(EvalError) as info:
        eval_template("1" + "0" * 300 + "*" + "1" + "0" * 300, ctx_for(total))
    assert info.value.kind == "overflow"


@pytest.mark.parametrize("raw", ["inf", "nan", "1e999", "0x10"])
def test_non_decimal_placeholders_rejected(raw):
    book = book_element(raw, "1", "0", "0")
    with pytest.raises(EvalError):
        eval_template("#(../qty)", ctx_for(book.element_children()[-1]))


def test_value_ref_first_match_and_unresolved():
    doc = parse_document(b"<r><a>1</a><a>2</a></r>")
    ctx = EvalContext(doc.root, "")
    assert eval_expr(ValueRef(parse_path("a")), ctx) == "1"
    with pytest.raises(EvalError) as info:
        eval_expr(ValueRef(parse_path("zzz")), ctx)
    assert info.value.kind == "path-unresolved"
    with pytest.raises(EvalError):
        eval_expr(ValueRef(parse_path("../x")), ctx)


def test_coerce_bool():
    assert coerce_bool("true") is True
    assert coerce_bool(False) is False
    with pytest.raises(EvalError) as info:
        coerce_bool(1.0)
    assert info.value.kind == "type"
    with pytest.raises(EvalError):
        coerce_bool("yes")


def test_comparison_ladder():
    assert values_equal("625", 625.0)
    assert values_equal("121.5", 121.50000000000001)
    assert values_equal(" 5 ", "5.0")
    assert not values_equal("5", "5.001")
    assert values_equal("true", True)
    assert not values_equal("false", True)
    assert values_equal("J.R.R. Tolkien", "J.R.R. Tolkien")
    assert not values_equal("J.R.R. Tolkien", "J.R.R Tolkien")
    assert not values_equal("1", "true")


def test_ordering_needs_numbers():
    ctx = EvalContext(Element("a"), "")
    assert eval_expr(BinaryOp("greater-equal", Data("2"), Data("2.0")), ctx) is True
    assert eval_expr(BinaryOp("less", Data("2"), Data("10")), ctx) is True
    with pytest.raises(EvalError):
        eval_expr(BinaryOp("greater", Data("b"), Data("a")), ctx)


def test_or_short_circuits():
    ctx = EvalContext(Element("a"), "")
    unresolvable = BinaryOp("equal", ValueRef(parse_path("nothing")), Data("x"))
    assert eval_expr(BinaryOp("or", Data("true"), unresolvable), ctx) is True
    assert eval_expr(BinaryOp("and", Data("false"), unresolvable), ctx) is False
    with pytest.raises(EvalError):
        eval_expr(BinaryOp("or", Data("false"), unresolvable), ctx)
    with pytest.raises(EvalError) as info:
        eval_expr(BinaryOp("and", Data("1"), Data("true")), ctx)
    assert info.value.kind == "type"


def test_eval_is_pure(cart_doc, cart_rules):
    from srml.xmltree import serialize

    before = serialize(cart_doc)
    ctx = ctx_for(child(cart_doc, "/cart/book[2]/tax"))
    expr = cart_rules.groups[2].defs[0].instances[0].expr
    assert eval_expr(expr, ctx) == eval_expr(expr, ctx)
    assert serialize(cart_doc) == before


@pytest.mark.parametrize(
    "number, plain, decimal",
    [(625.0, "625", "625.0"), (121.5, "121.5", "121.5"), (1125.0, "1125", "1125.0"), (90.00000000000001, "90", "90.0"), (-0.0, "0", "0.0")],
)
def test_format_number(number, plain, decimal):
    assert format_number(number) == plain
    assert format_number(number, one_decimal=True) == decimal


@given(st.floats(-1e12, 1e12, allow_nan=False), st.floats(-1e12, 1e12, allow_nan=False))
def test_equality_symmetric(a, b):
    assert values_equal(a, b) == values_equal(b, a)


def test_template_matches_direct_arithmetic():
    rng = random.Random(7)
    for _ in range(200):
        qty, price = rng.randint(0, 20), round(rng.uniform(0, 1000), 2)
        discount, tax = rng.randint(0, 100), round(rng.uniform(0, 200), 1)
        book = book_element(qty, price, discount, tax)
        got = eval_template(TEMPLATE, ctx_for(book.element_children()[-1]))
        want = book_total(qty, price, discount, tax)
        assert math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)


_atoms = st.one_of(
    st.floats(0, 1e30, allow_nan=False).map(lambda x: Const(float(format(x, "f")))),
    st.sampled_from(["../qty", "@TAX", "a/b[2]", "//c"]).map(lambda p: Placeholder(parse_path(p))),
)
_trees = st.recursive(
    _atoms,
    lambda sub: st.one_of(
        sub.map(Neg),
        st.tuples(st.sampled_from("+-*/"), sub, sub).map(lambda t: Bin(*t)),
    ),
    max_leaves=12,
)


@given(_trees)
def test_template_printer_fixpoint(tree):
    assert parse_template(str(tree)) == tree
