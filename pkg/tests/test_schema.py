import pytest

from srml.errors import SchemaError
from srml.paths import evaluate
from srml.schema import ComplexContent, extract_srml, parse_schema, validate_structure
from srml.xmltree import parse_document, parse_file, set_value

XSD = b'<xsd:schema xmlns:xsd="http://www.w3.org/2001/XMLSchema">%s</xsd:schema>'


def schema_of(body: bytes):
    return parse_schema(parse_document(XSD % body))


def test_cart_schema_shape(cart_schema):
    assert set(cart_schema.element_decls) == {"cart", "book"}
    isbn = cart_schema.simple_types["ISBN-type"]
    assert isbn.pattern == r"\d{1}-\d{5}-\d{3}-\d{1}|\d{1}-\d{3}-\d{5}-\d{1}|\d{1}-\d{2}-\d{6}-\d{1}"
    book = cart_schema.element_decls["book"]
    [cover] = book.attributes
    assert cover.name == "cover" and not cover.required
    assert set(cover.type.enumeration) == {"paperback", "hardcover", "digital"}
    assert isinstance(book.content, ComplexContent) and book.content.model == "sequence"
    [particle] = cart_schema.element_decls["cart"].content.particles
    assert (particle.name, particle.min_occurs, particle.max_occurs) == ("book", 0, None)


def test_empty_schema():
    schema = schema_of(b"")
    assert schema.element_decls == {} and schema.srml_sources == []


def test_cart_is_structurally_valid(cart_doc, cart_schema):
    assert validate_structure(cart_doc, cart_schema) == []


def _first_book_child(doc, name):
    return evaluate(f"/cart/book[1]/{name}", doc.root)[0]


def test_isbn_pattern_violation(cart_doc, cart_schema):
    set_value(_first_book_child(cart_doc, "isbn"), "abc")
    [finding] = validate_structure(cart_doc, cart_schema)
    assert finding.target_location == "/cart/book[1]/isbn"
    assert "pattern" in finding.rule_message
    assert finding.severity == "structural"


def test_cover_enumeration_violation(cart_doc, cart_schema):
    set_value(cart_doc.root.element_children()[0], "audiobook", attribute="cover")
    [finding] = validate_structure(cart_doc, cart_schema)
    assert finding.target_location == "/cart/book[1]/@cover"


@pytest.mark.parametrize(
    "child, value, fragment",
    [("qty", "five", "integer"), ("qty", "+5", None), ("total", "1e3", None), ("total", "12,5", "float")],
)
def test_simple_types(cart_doc, cart_schema, child, value, fragment):
    set_value(_first_book_child(cart_doc, child), value)
    findings = validate_structure(cart_doc, cart_schema)
    if fragment is None:
        assert findings == []
    else:
        [finding] = findings
        assert fragment in finding.rule_message


@pytest.mark.parametrize("value, ok", [("true", True), ("0", True), ("1", True), ("yes", False), ("True", False)])
def test_boolean(cart_doc, cart_schema, value, ok):
    set_value(cart_doc.root, value, attribute="hasDiscount")
    assert (validate_structure(cart_doc, cart_schema) == []) is ok


def test_pattern_is_anchored(cart_doc, cart_schema):
    set_value(_first_book_child(cart_doc, "isbn"), "1-12345-123-12")
    assert len(validate_structure(cart_doc, cart_schema)) == 1


def test_order_missing_unknown_and_attributes(cart_schema):
    doc = parse_document(
        b'<cart bogus="1"><book cover="digital"><title>t</title><author>a</author><isbn>1-12345-123-1</isbn>'
        b"<qty>1</qty><price>1</price><discount>0</discount><tax>0</tax><total>1</total><region>0</region>"
        b"<extra/></book><pamphlet/></cart>"
    )
    findings = validate_structure(doc, cart_schema)
    assert [f.target_location for f in findings] == [
        "/cart/@bogus",
        "/cart/book/title",
        "/cart/book/author",
        "/cart/book/extra",
        "/cart/pamphlet",
    ]
    assert "not declared" in findings[0].rule_message
    assert "expected 1 or more 'author'" in findings[1].rule_message
    assert "out of order" in findings[2].rule_message
    assert "unknown element 'pamphlet'" in findings[-1].rule_message


def test_occurrence_bounds_and_required_attribute():
    schema = schema_of(
        b'<xsd:element name="r"><xsd:complexType><xsd:sequence>'
        b'<xsd:element name="a" type="xsd:string" minOccurs="2" maxOccurs="3"/>'
        b'</xsd:sequence><xsd:attribute name="id" type="xsd:integer" use="required"/></xsd:complexType></xsd:element>'
    )
    assert [f.rule_message for f in validate_structure(parse_document(b'<r id="1"><a/><a/></r>'), schema)] == []
    few = validate_structure(parse_document(b'<r id="1"><a/></r>'), schema)
    assert len(few) == 1 and "found 1" in few[0].rule_message
    many = validate_structure(parse_document(b'<r id="1"><a/><a/><a/><a/></r>'), schema)
    assert [f.target_location for f in many] == ["/r/a[4]"]
    missing = validate_structure(parse_document(b"<r><a/><a/></r>"), schema)
    assert [f.target_location for f in missing] == ["/r/@id"]


def test_choice(fixtures):
    schema = schema_of(
        b'<xsd:element name="expr"><xsd:complexType><xsd:choice>'
        b'<xsd:element name="multexpr" minOccurs="0" maxOccurs="unbounded" />'
        b'<xsd:element name="addexpr" minOccurs="0" maxOccurs="unbounded" />'
        b'</xsd:choice><xsd:attribute name="type" use="optional"><xsd:simpleType>'
        b'<xsd:restriction base="xsd:string"><xsd:enumeration value="int" /><xsd:enumeration value="real" />'
        b"</xsd:restriction></xsd:simpleType></xsd:attribute></xsd:complexType></xsd:element>"
    )
    assert validate_structure(parse_document(b"<expr><addexpr/><addexpr/></expr>"), schema) == []
    assert validate_structure(parse_document(b"<expr/>"), schema) == []
    mixed = validate_structure(parse_document(b'<expr type="real"><addexpr/><multexpr/></expr>'), schema)
    assert [f.target_location for f in mixed] == ["/expr/multexpr"]
    bad_type = validate_structure(parse_document(b'<expr type="complex"/>'), schema)
    assert [f.target_location for f in bad_type] == ["/expr/@type"]


def test_unknown_root_is_single_finding(cart_schema):
    [finding] = validate_structure(parse_document(b"<basket><x/></basket>"), cart_schema)
    assert finding.target_location == "/basket"


@pytest.mark.parametrize(
    "body, word",
    [
        (b'<xsd:import namespace="x"/>', "import"),
        (b'<xsd:group name="g"/>', "group"),
        (b'<xsd:element name="a"><xsd:complexType><xsd:complexContent/></xsd:complexType></xsd:element>', "complexContent"),
        (b'<xsd:element name="a" type="xsd:string"><xsd:key name="k"/></xsd:element>', "key"),
        (b'<xsd:simpleType name="t"><xsd:restriction base="xsd:string"><xsd:pattern value="\\w+"/></xsd:restriction></xsd:simpleType>', "regular expression"),
        (b'<xsd:simpleType name="t"><xsd:restriction base="xsd:string"><xsd:pattern value="^a$"/></xsd:restriction></xsd:simpleType>', "regular expression"),
        (b'<xsd:element name="a" type="nope"/>', "unknown type"),
    ],
)
def test_unsupported_constructs(body, word):
    with pytest.raises(SchemaError, match=word):
        schema_of(body)


def test_pattern_subset_accepts_common_constructs():
    schema = schema_of(
        b'<xsd:simpleType name="t"><xsd:restriction base="xsd:string">'
        b'<xsd:pattern value="[A-Z]{2}(\\d{1,3})?-[a-z]+"/></xsd:restriction></xsd:simpleType>'
        b'<xsd:element name="v" type="t"/>'
    )
    assert validate_structure(parse_document(b"<v>AB12-x</v>"), schema) == []
    assert len(validate_structure(parse_document(b"<v>AB1234-x</v>"), schema)) == 1


def test_extract_embedded_rules(fixtures):
    schema = parse_schema(parse_file(fixtures / "cart_with_rules.xsd"))
    [source] = extract_srml(schema)
    assert source.local_name == "srml-def"
    assert len([c for c in source.element_children() if c.local_name == "rules-for"]) == 4
    assert source.attributes["xmlns:srml"] == "http://www.sed.inf.u-szeged.hu/SRMLSchema"
    assert validate_structure(parse_file(fixtures / "cart.xml"), schema) == []


def test_extract_ignores_jaxb(fixtures):
    assert extract_srml(parse_schema(parse_file(fixtures / "jaxb_only.xsd"))) == []


def test_extract_two_blocks_in_order():
    schema = schema_of(
        b'<xsd:annotation><xsd:appinfo><srml-def id="1"/></xsd:appinfo></xsd:annotation>'
        b'<xsd:annotation><xsd:appinfo><s:srml-def xmlns:s="u" id="2"/></xsd:appinfo></xsd:annotation>'
    )
    assert [s.attributes["id"] for s in extract_srml(schema)] == ["1", "2"]


def test_determinism(cart_schema):
    doc = parse_document(b"<cart><x/><book/><y/></cart>")
    runs = [[f.to_json() for f in validate_structure(doc, cart_schema)] for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]
