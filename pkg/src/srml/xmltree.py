"""A small mutable XML tree with parent links.

The tree keeps element names exactly as written (``srml:rule-def`` stays
``srml:rule-def``); namespace handling is lexical.  Whitespace-only text
between elements, comments and processing instructions are dropped while
parsing.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from xml.parsers import expat

from .errors import WellFormednessError

__all__ = [
    "Element",
    "Text",
    "Document",
    "parse_document",
    "parse_file",
    "serialize",
    "set_value",
    "node_location",
    "local_name",
    "structurally_equal",
]

_NAME_RE = re.compile(r"^[^\s<>&\"'=/!?]+$")


def local_name(name: str) -> str:
    """Return ``name`` without its namespace prefix."""
    return name.rpartition(":")[2]


@dataclass(eq=False)
class Text:
    text: str
    parent: Element | None = field(default=None, repr=False)


@dataclass(eq=False)
class Element:
    name: str
    attributes: dict[str, str] = field(default_factory=dict)
    children: list[Element | Text] = field(default_factory=list)
    parent: Element | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name):
            raise ValueError(f"invalid element name {self.name!r}")

    @property
    def local_name(self) -> str:
        return local_name(self.name)

    def append(self, child: Element | Text) -> Element | Text:
        child.parent = self
        self.children.append(child)
        return child

    def element_children(self) -> list[Element]:
        return [c for c in self.children if isinstance(c, Element)]

    def iter(self) -> Iterator[Element]:
        """Pre-order walk over this element and all element descendants."""
        stack: list[Element] = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.element_children()))

    def text_content(self) -> str:
        parts: list[str] = []
        for child in self.children:
            if isinstance(child, Text):
                parts.append(child.text)
            else:
                parts.append(child.text_content())
        return "".join(parts)

    def set_attribute(self, name: str, value: str) -> None:
        if not _NAME_RE.match(name):
            raise ValueError(f"invalid attribute name {name!r}")
        self.attributes[name] = value

    def root(self) -> Element:
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    def clone(self) -> Element:
        copy = Element(self.name, dict(self.attributes))
        for child in self.children:
            if isinstance(child, Text):
                copy.append(Text(child.text))
            else:
                copy.append(child.clone())
        return copy


@dataclass(eq=False)
class Document:
    root: Element
    source_name: str = "<memory>"

    def __post_init__(self) -> None:
        if self.root.parent is not None:
            raise ValueError("document root must not have a parent")

    def clone(self) -> Document:
        return Document(self.root.clone(), self.source_name)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Document):
            return NotImplemented
        return structurally_equal(self.root, other.root)

    __hash__ = None  # type: ignore[assignment]


def structurally_equal(a: Element | Text, b: Element | Text) -> bool:
    """Compare names, ordered attributes, ordered children and text."""
    if isinstance(a, Text) or isinstance(b, Text):
        return isinstance(a, Text) and isinstance(b, Text) and a.text == b.text
    if a.name != b.name or list(a.attributes.items()) != list(b.attributes.items()):
        return False
    if len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))


class _TreeBuilder:
    def __init__(self, parser: expat.XMLParserType):
        self.parser = parser
        self.stack: list[Element] = []
        self.root: Element | None = None
        self.pending: list[str] = []

    def _flush(self) -> None:
        if not self.pending:
            return
        text = "".join(self.pending)
        self.pending.clear()
        if self.stack and text.strip():
            self.stack[-1].append(Text(text))

    def start(self, name: str, attrs: list[str]) -> None:
        self._flush()
        element = Element(name, dict(zip(attrs[::2], attrs[1::2])))
        if self.stack:
            self.stack[-1].append(element)
        else:
            self.root = element
        self.stack.append(element)

    def end(self, name: str) -> None:
        self._flush()
        self.stack.pop()

    def data(self, text: str) -> None:
        self.pending.append(text)


def parse_document(data: bytes | str, source_name: str = "<bytes>") -> Document:
    """Parse UTF-8 XML into a :class:`Document`.

    Raises :class:`WellFormednessError` carrying the line and column reported
    by the underlying parser.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    parser = expat.ParserCreate()
    parser.ordered_attributes = True
    parser.buffer_text = True
    builder = _TreeBuilder(parser)
    parser.StartElementHandler = builder.start
    parser.EndElementHandler = builder.end
    parser.CharacterDataHandler = builder.data
    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise WellFormednessError(
            expat.ErrorString(exc.code), exc.lineno, exc.offset + 1, source_name
        ) from None
    except ValueError as exc:
        raise WellFormednessError(
            str(exc), parser.CurrentLineNumber, parser.CurrentColumnNumber + 1, source_name
        ) from None
    assert builder.root is not None
    return Document(builder.root, source_name)


def parse_file(path) -> Document:
    with open(path, "rb") as fh:
        return parse_document(fh.read(), str(path))


_TEXT_ESCAPES = str.maketrans(
    {"&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&apos;", "\r": "&#13;"}
)
_ATTR_ESCAPES = str.maketrans(
    {
        "&": "&amp;",
        "<": "&lt;",
        ">": "&gt;",
        '"': "&quot;",
        "'": "&apos;",
        "\r": "&#13;",
        "\n": "&#10;",
        "\t": "&#9;",
    }
)


def _write(element: Element, out: list[str], depth: int) -> None:
    indent = "  " * depth
    attrs = "".join(f' {k}="{v.translate(_ATTR_ESCAPES)}"' for k, v in element.attributes.items())
    if not element.children:
        out.append(f"{indent}<{element.name}{attrs}/>\n")
        return
    if any(isinstance(c, Text) for c in element.children):
        # mixed or text content is written inline so no whitespace is invented
        out.append(f"{indent}<{element.name}{attrs}>")
        _write_inline(element.children, out)
        out.append(f"</{element.name}>\n")
        return
    out.append(f"{indent}<{element.name}{attrs}>\n")
    for child in element.children:
        _write(child, out, depth + 1)  # type: ignore[arg-type]
    out.append(f"{indent}</{element.name}>\n")


def _write_inline(children: list[Element | Text], out: list[str]) -> None:
    for child in children:
        if isinstance(child, Text):
            out.append(child.text.translate(_TEXT_ESCAPES))
            continue
        attrs = "".join(
            f' {k}="{v.translate(_ATTR_ESCAPES)}"' for k, v in child.attributes.items()
        )
        if child.children:
            out.append(f"<{child.name}{attrs}>")
            _write_inline(child.children, out)
            out.append(f"</{child.name}>")
        else:
            out.append(f"<{child.name}{attrs}/>")


def serialize(doc: Document | Element) -> bytes:
    """Serialize to indented UTF-8 XML with an XML declaration."""
    root = doc.root if isinstance(doc, Document) else doc
    out = ['<?xml version="1.0" encoding="UTF-8"?>\n']
    _write(root, out, 0)
    return "".join(out).encode("utf-8")


def set_value(node: Element, value: str, attribute: str | None = None) -> None:
    """Overwrite an element's text, or set one of its attributes.

    With ``attribute=None`` every child of ``node`` is replaced by a single
    text node holding ``value``.
    """
    if attribute is not None:
        node.set_attribute(attribute, value)
        return
    for child in node.children:
        child.parent = None
    node.children = []
    if value:
        node.append(Text(value))


def node_location(node: Element, attribute: str | None = None) -> str:
    """Canonical indexed path such as ``/cart/book[2]/tax`` or ``/cart/@hasDiscount``."""
    steps: list[str] = []
    current: Element | None = node
    while current is not None:
        parent = current.parent
        step = current.name
        if parent is not None:
            same = [c for c in parent.element_children() if c.name == current.name]
            if len(same) > 1:
                step += f"[{next(i for i, c in enumerate(same, 1) if c is current)}]"
        steps.append(step)
        current = parent
    path = "/" + "/".join(reversed(steps))
    if attribute is not None:
        path += f"/@{attribute}"
    return path
