"""Structural validation against a small XSD subset.

Supported: global and local element declarations, ``ref``, named and
anonymous complex types (no derivation) with a flat ``sequence`` or
``choice``, occurrence bounds, attribute declarations, and simple types
restricted by ``pattern`` and ``enumeration``.  SRML payloads found under
``annotation/appinfo`` are collected as they are.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SchemaError
from .xmltree import Document, Element, Text, local_name, node_location

__all__ = [
    "SimpleTypeDef",
    "AttributeDecl",
    "Particle",
    "ComplexContent",
    "ElementDecl",
    "Schema",
    "Finding",
    "parse_schema",
    "validate_structure",
    "extract_srml",
    "SRML_NAMESPACE",
]

SRML_NAMESPACE = "http://www.sed.inf.u-szeged.hu/SRMLSchema"
UNBOUNDED = None

_BUILTINS = {
    "string": "string",
    "normalizedString": "string",
    "token": "string",
    "anySimpleType": "string",
    "integer": "integer",
    "int": "integer",
    "long": "integer",
    "short": "integer",
    "float": "float",
    "double": "float",
    "decimal": "float",
    "boolean": "boolean",
}

_INTEGER_RE = re.compile(r"[+-]?[0-9]+")
_FLOAT_RE = re.compile(r"[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?")
_BOOLEANS = frozenset({"true", "false", "1", "0"})

# Constructs whose meaning is the same for XSD regexes and Python's re.
_PATTERN_TOKEN = re.compile(
    r"""
    \\[dDnrt.\-\\|(){}\[\]^$*+?]   # \d and escaped metacharacters
    | \{[0-9]+(,[0-9]*)?\}          # {n} {n,} {n,m}
    | \[\^?(?:\\[dnrt\\\-\]\[^]|[^\\\]\[])+\]   # simple character class
    | [|()?*+]
    | [^\\\[\]{}().^$?*+|]          # literal
    """,
    re.VERBOSE,
)


def _compile_pattern(pattern: str) -> re.Pattern[str]:
    pos = 0
    while pos < len(pattern):
        m = _PATTERN_TOKEN.match(pattern, pos)
        if not m:
            raise SchemaError(f"unsupported regular expression construct at offset {pos} in {pattern!r}")
        if pattern.startswith("(?", m.start()):
            raise SchemaError(f"unsupported group syntax in {pattern!r}")
        pos = m.end()
    try:
        return re.compile(pattern)
    except re.error as exc:
        raise SchemaError(f"invalid pattern {pattern!r}: {exc}") from None


@dataclass
class SimpleTypeDef:
    base: str
    pattern: str | None = None
    enumeration: tuple[str, ...] | None = None
    name: str | None = None
    _compiled: re.Pattern[str] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.pattern is not None and self._compiled is None:
            self._compiled = _compile_pattern(self.pattern)

    def check(self, value: str) -> str | None:
        """Return a description of the violation, or None when ``value`` conforms."""
        lexical = value if self.base == "string" else value.strip()
        if self.base == "integer" and not _INTEGER_RE.fullmatch(lexical):
            return f"{value!r} is not a valid integer"
        if self.base == "float" and not _FLOAT_RE.fullmatch(lexical):
            return f"{value!r} is not a valid float"
        if self.base == "boolean" and lexical not in _BOOLEANS:
            return f"{value!r} is not a valid boolean"
        if self._compiled is not None and not self._compiled.fullmatch(lexical):
            return f"{value!r} does not match pattern {self.pattern!r}"
        if self.enumeration is not None and lexical not in self.enumeration:
            return f"{value!r} is not one of {', '.join(self.enumeration)}"
        return None


@dataclass
class AttributeDecl:
    name: str
    type: SimpleTypeDef
    required: bool = False


@dataclass
class Particle:
    name: str
    min_occurs: int = 1
    max_occurs: int | None = 1
    decl: ElementDecl | None = None  # local declaration, else resolved globally


@dataclass
class ComplexContent:
    model: str  # "sequence" | "choice" | "empty"
    particles: list[Particle] = field(default_factory=list)


@dataclass
class ElementDecl:
    name: str
    content: SimpleTypeDef | ComplexContent | None  # None accepts anything
    attributes: list[AttributeDecl] = field(default_factory=list)


@dataclass
class Schema:
    element_decls: dict[str, ElementDecl] = field(default_factory=dict)
    simple_types: dict[str, SimpleTypeDef] = field(default_factory=dict)
    srml_sources: list[Element] = field(default_factory=list)


@dataclass
class Finding:
    severity: str  # "error" | "corrected" | "structural"
    rule_message: str
    target_location: str
    found: str = ""
    expected: str = ""
    instance_index: int = -1

    def to_json(self) -> dict[str, object]:
        return {
            "severity": self.severity,
            "message": self.rule_message,
            "location": self.target_location,
            "found": self.found,
            "expected": self.expected,
            "instanceIndex": self.instance_index,
        }


class _SchemaParser:
    def __init__(self, root: Element):
        self.root = root
        self.schema = Schema()
        self.complex_types: dict[str, tuple[ComplexContent, list[AttributeDecl]]] = {}
        self.pending_types: list[tuple[object, str, str]] = []

    def parse(self) -> Schema:
        if self.root.local_name != "schema":
            raise SchemaError(f"root element must be xsd:schema, not {self.root.name}")
        self._collect_appinfo(self.root)
        children = self.root.element_children()
        for child in children:
            kind = child.local_name
            if kind == "simpleType":
                name = self._required(child, "name")
                self.schema.simple_types[name] = self._simple_type(child, name)
            elif kind == "complexType":
                name = self._required(child, "name")
                self.complex_types[name] = self._complex_type(child)
        for child in children:
            kind = child.local_name
            if kind == "element":
                decl = self._element(child, top_level=True)
                if decl.name in self.schema.element_decls:
                    raise SchemaError(f"duplicate element declaration {decl.name!r}")
                self.schema.element_decls[decl.name] = decl
            elif kind in ("simpleType", "complexType", "annotation"):
                continue
            else:
                raise SchemaError(f"unsupported schema construct xsd:{kind}")
        self._resolve_pending()
        return self.schema

    def _collect_appinfo(self, element: Element) -> None:
        for node in element.iter():
            if node.local_name != "appinfo":
                continue
            for child in node.element_children():
                if child.local_name == "srml-def":
                    self.schema.srml_sources.append(_detach_with_namespaces(child))

    @staticmethod
    def _required(element: Element, attr: str) -> str:
        try:
            return element.attributes[attr]
        except KeyError:
            raise SchemaError(f"{element.name} at {node_location(element)} needs a {attr!r} attribute") from None

    def _type_ref(self, type_name: str) -> SimpleTypeDef | None:
        local = local_name(type_name)
        if ":" in type_name and local in _BUILTINS:
            return SimpleTypeDef(_BUILTINS[local], name=type_name)
        if type_name in self.schema.simple_types:
            return self.schema.simple_types[type_name]
        if ":" not in type_name and local in _BUILTINS:
            return SimpleTypeDef(_BUILTINS[local], name=type_name)
        return None

    def _simple_type(self, element: Element, name: str | None = None) -> SimpleTypeDef:
        children = [c for c in element.element_children() if c.local_name != "annotation"]
        if len(children) != 1 or children[0].local_name != "restriction":
            raise SchemaError(f"simpleType {name or '(anonymous)'}: only xsd:restriction is supported")
        restriction = children[0]
        base_ref = self._type_ref(self._required(restriction, "base"))
        if base_ref is None:
            raise SchemaError(f"unknown base type {restriction.attributes['base']!r}")
        patterns: list[str] = []
        enumeration: list[str] = []
        for facet in restriction.element_children():
            kind = facet.local_name
            if kind == "pattern":
                patterns.append(self._required(facet, "value"))
            elif kind == "enumeration":
                enumeration.append(self._required(facet, "value"))
            elif kind != "annotation":
                raise SchemaError(f"unsupported facet xsd:{kind}")
        if len(patterns) > 1:
            raise SchemaError("multiple pattern facets are not supported")
        pattern = patterns[0] if patterns else base_ref.pattern
        enum = tuple(enumeration) if enumeration else base_ref.enumeration
        return SimpleTypeDef(base_ref.base, pattern, enum, name)

    def _complex_type(self, element: Element) -> tuple[ComplexContent, list[AttributeDecl]]:
        content = ComplexContent("empty")
        attributes: list[AttributeDecl] = []
        for child in element.element_children():
            kind = child.local_name
            if kind in ("sequence", "choice"):
                if content.model != "empty":
                    raise SchemaError("a complexType may hold only one model group")
                if child.attributes.get("minOccurs", "1") != "1" or child.attributes.get("maxOccurs", "1") != "1":
                    raise SchemaError(f"occurrence bounds on xsd:{kind} are not supported")
                content = ComplexContent(kind, [self._particle(p) for p in child.element_children()
                                                if p.local_name != "annotation"])
            elif kind == "attribute":
                attributes.append(self._attribute(child))
            elif kind == "annotation":
                continue
            else:
                raise SchemaError(f"unsupported complexType construct xsd:{kind}")
        names = [a.name for a in attributes]
        if len(names) != len(set(names)):
            raise SchemaError("duplicate attribute declaration")
        return content, attributes

    def _particle(self, element: Element) -> Particle:
        if element.local_name != "element":
            raise SchemaError(f"unsupported model group content xsd:{element.local_name}")
        min_occurs = _occurs(element.attributes.get("minOccurs", "1"), "minOccurs")
        raw_max = element.attributes.get("maxOccurs", "1")
        max_occurs = UNBOUNDED if raw_max == "unbounded" else _occurs(raw_max, "maxOccurs")
        if max_occurs is not None and min_occurs > max_occurs:
            raise SchemaError(f"minOccurs > maxOccurs for {element.attributes.get('name')}")
        if "ref" in element.attributes:
            return Particle(element.attributes["ref"], min_occurs, max_occurs)
        name = self._required(element, "name")
        has_definition = "type" in element.attributes or any(
            c.local_name in ("simpleType", "complexType") for c in element.element_children()
        )
        decl = self._element(element, top_level=False) if has_definition else None
        return Particle(name, min_occurs, max_occurs, decl)

    def _attribute(self, element: Element) -> AttributeDecl:
        name = self._required(element, "name")
        use = element.attributes.get("use", "optional")
        if use not in ("optional", "required"):
            raise SchemaError(f"unsupported attribute use {use!r}")
        inline = [c for c in element.element_children() if c.local_name == "simpleType"]
        if inline:
            type_ = self._simple_type(inline[0])
        elif "type" in element.attributes:
            type_ = self._type_ref(element.attributes["type"])
            if type_ is None:
                raise SchemaError(f"unknown type {element.attributes['type']!r} for attribute {name}")
        else:
            type_ = SimpleTypeDef("string")
        return AttributeDecl(name, type_, use == "required")

    def _element(self, element: Element, top_level: bool) -> ElementDecl:
        name = self._required(element, "name")
        for unsupported in ("substitutionGroup", "abstract", "default", "fixed"):
            if unsupported in element.attributes:
                raise SchemaError(f"unsupported element attribute {unsupported!r} on {name}")
        decl = ElementDecl(name, None)
        for child in element.element_children():
            kind = child.local_name
            if kind == "complexType":
                decl.content, decl.attributes = self._complex_type(child)
            elif kind == "simpleType":
                decl.content = self._simple_type(child)
            elif kind in ("key", "keyref", "unique"):
                raise SchemaError(f"unsupported identity constraint xsd:{kind} on {name}")
            elif kind != "annotation":
                raise SchemaError(f"unsupported element content xsd:{kind} on {name}")
        if "type" in element.attributes:
            self.pending_types.append((decl, element.attributes["type"], name))
        return decl

    def _resolve_pending(self) -> None:
        for decl, type_name, name in self.pending_types:
            simple = self._type_ref(type_name)
            if simple is not None:
                decl.content = simple
            elif type_name in self.complex_types:
                content, attributes = self.complex_types[type_name]
                decl.content, decl.attributes = content, list(attributes)
            else:
                raise SchemaError(f"unknown type {type_name!r} for element {name}")


def _occurs(raw: str, what: str) -> int:
    if not raw.isdigit():
        raise SchemaError(f"invalid {what} value {raw!r}")
    return int(raw)


def _detach_with_namespaces(element: Element) -> Element:
    """Copy ``element`` and carry over ``xmlns`` declarations from its ancestors."""
    copy = element.clone()
    inherited: dict[str, str] = {}
    ancestor = element.parent
    while ancestor is not None:
        for key, value in ancestor.attributes.items():
            if (key == "xmlns" or key.startswith("xmlns:")) and key not in inherited:
                inherited[key] = value
        ancestor = ancestor.parent
    for key, value in inherited.items():
        copy.attributes.setdefault(key, value)
    return copy


def parse_schema(doc: Document) -> Schema:
    """Build a :class:`Schema` from a parsed XSD document."""
    return _SchemaParser(doc.root).parse()


def extract_srml(schema: Schema) -> list[Element]:
    return list(schema.srml_sources)


def _is_meta_attribute(name: str) -> bool:
    return name == "xmlns" or name.startswith(("xmlns:", "xsi:"))


class _StructureChecker:
    def __init__(self, schema: Schema, root: Element):
        self.schema = schema
        self.order = {id(e): i for i, e in enumerate(root.iter())}
        self.found: list[tuple[int, int, Finding]] = []

    def report(self, node: Element, message: str, attribute: str | None = None, found: str = "") -> None:
        finding = Finding("structural", message, node_location(node, attribute), found=found)
        self.found.append((self.order[id(node)], 0 if attribute is None else 1, finding))

    def check(self, element: Element, decl: ElementDecl) -> None:
        declared = {a.name: a for a in decl.attributes}
        if isinstance(decl.content, ComplexContent):
            for attr in decl.attributes:
                if attr.required and attr.name not in element.attributes:
                    self.report(element, f"required attribute {attr.name!r} is missing", attr.name)
            for name, value in element.attributes.items():
                if _is_meta_attribute(name):
                    continue
                if name not in declared:
                    self.report(element, f"attribute {name!r} is not declared", name, value)
                    continue
                problem = declared[name].type.check(value)
                if problem:
                    self.report(element, problem, name, value)
            self.check_children(element, decl.content)
        elif isinstance(decl.content, SimpleTypeDef):
            for name, value in element.attributes.items():
                if not _is_meta_attribute(name):
                    self.report(element, f"attribute {name!r} is not declared", name, value)
            if element.element_children():
                self.report(element, f"element {element.name!r} must have simple content")
                return
            value = element.text_content()
            problem = decl.content.check(value)
            if problem:
                self.report(element, problem, found=value)

    def resolve(self, particle: Particle) -> ElementDecl | None:
        if particle.decl is not None:
            return particle.decl
        return self.schema.element_decls.get(particle.name)

    def check_children(self, element: Element, content: ComplexContent) -> None:
        children = element.element_children()
        if content.model == "empty":
            for child in children:
                self.report(child, f"element {child.name!r} is not allowed here")
            return
        by_name = {p.name: p for p in content.particles}
        matched: list[tuple[Element, Particle]] = []
        if content.model == "sequence":
            particles = content.particles
            counts = [0] * len(particles)
            current = 0
            for child in children:
                # resynchronise on the next particle that accepts this child
                target = None
                for j in range(current, len(particles)):
                    p = particles[j]
                    if p.name == child.name and (p.max_occurs is None or counts[j] < p.max_occurs):
                        target = j
                        break
                if target is None:
                    self.report_stray(child, by_name)
                    continue
                for k in range(current, target):
                    self.report_missing(child, particles[k], counts[k])
                current = target
                counts[target] += 1
                matched.append((child, particles[target]))
            for k in range(current, len(particles)):
                self.report_missing(element, particles[k], counts[k])
        else:
            chosen = by_name.get(children[0].name) if children else None
            if not children:
                if content.particles and all(p.min_occurs > 0 for p in content.particles):
                    options = ", ".join(p.name for p in content.particles)
                    self.report(element, f"expected one of: {options}")
            elif chosen is None:
                self.report_stray(children[0], by_name)
            else:
                count = 0
                for child in children:
                    if child.name != chosen.name:
                        self.report_stray(child, by_name)
                        continue
                    count += 1
                    if chosen.max_occurs is not None and count > chosen.max_occurs:
                        self.report(child, f"too many {chosen.name!r} elements (at most {chosen.max_occurs})")
                        continue
                    matched.append((child, chosen))
                if count < chosen.min_occurs:
                    self.report(element, f"expected {chosen.min_occurs} or more {chosen.name!r} element(s), found {count}")
        for child, particle in matched:
            child_decl = self.resolve(particle)
            if child_decl is not None:
                self.check(child, child_decl)

    def report_missing(self, at: Element, particle: Particle, count: int) -> None:
        if count < particle.min_occurs:
            self.report(at, f"expected {particle.min_occurs} or more {particle.name!r} element(s), found {count}")

    def report_stray(self, child: Element, by_name: dict[str, Particle]) -> None:
        if child.name in by_name:
            self.report(child, f"element {child.name!r} is out of order or exceeds its occurrence bound")
        else:
            self.report(child, f"unknown element {child.name!r}")


def validate_structure(doc: Document, schema: Schema) -> list[Finding]:
    """Structural findings for ``doc`` in document order; empty means valid."""
    checker = _StructureChecker(schema, doc.root)
    decl = schema.element_decls.get(doc.root.name)
    if decl is None:
        checker.report(doc.root, f"no declaration for root element {doc.root.name!r}")
    else:
        checker.check(doc.root, decl)
    checker.found.sort(key=lambda item: (item[0], item[1]))
    return [f for _, _, f in checker.found]
