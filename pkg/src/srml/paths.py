"""Location paths used inside rules.

Supported forms::

    //book[@author="Jules Verne"]/title/text()
    /cart/book[2]/tax
    ../expr[1]/@type
    ../../x/*[@id]
    @QTY

``..`` steps are only allowed as a prefix of a relative path.  Functions,
explicit axes, unions and arithmetic are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import NavigationError, PathSyntaxError
from .xmltree import Document, Element, Text

__all__ = [
    "Predicate",
    "Step",
    "PathExpr",
    "parse_path",
    "evaluate",
    "string_value",
]

CHILD = "child"
PARENT = "parent"
DESCENDANT = "descendant-or-self-root"

_NAME = re.compile(r"[A-Za-z_][\w.\-]*(?::[A-Za-z_][\w.\-]*)?")
_INT = re.compile(r"[0-9]+")
_WS = re.compile(r"\s*")


@dataclass(frozen=True)
class Predicate:
    kind: str  # "position" | "attr-exists" | "attr-equals"
    index: int = 0
    name: str = ""
    value: str = ""

    def __str__(self) -> str:
        if self.kind == "position":
            return f"[{self.index}]"
        if self.kind == "attr-exists":
            return f"[@{self.name}]"
        quote = "'" if '"' in self.value else '"'
        return f"[@{self.name}={quote}{self.value}{quote}]"


@dataclass(frozen=True)
class Step:
    axis: str
    name_test: str = "*"
    predicates: tuple[Predicate, ...] = ()

    def __str__(self) -> str:
        if self.axis == PARENT:
            return ".."
        return self.name_test + "".join(map(str, self.predicates))


@dataclass(frozen=True)
class PathExpr:
    steps: tuple[Step, ...]
    terminal: tuple[str, str] | None = None  # ("attribute", name) or ("text", "")
    absolute: bool = False
    source: str = field(default="", compare=False)

    def __str__(self) -> str:
        parts = [str(s) for s in self.steps]
        if self.terminal is not None:
            parts.append("text()" if self.terminal[0] == "text" else f"@{self.terminal[1]}")
        body = "/".join(parts)
        if self.steps and self.steps[0].axis == DESCENDANT:
            return "//" + body
        if self.absolute:
            return "/" + body
        return body


class _PathParser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def fail(self, message: str, offset: int | None = None) -> PathSyntaxError:
        return PathSyntaxError(message, self.src, self.pos if offset is None else offset)

    def peek(self, text: str) -> bool:
        return self.src.startswith(text, self.pos)

    def eat(self, text: str) -> bool:
        if self.peek(text):
            self.pos += len(text)
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.eat(text):
            raise self.fail(f"expected {text!r}")

    def name(self) -> str:
        m = _NAME.match(self.src, self.pos)
        if not m:
            raise self.fail("expected a name")
        self.pos = m.end()
        return m.group()

    def skip_ws(self) -> None:
        self.pos = _WS.match(self.src, self.pos).end()

    def parse(self) -> PathExpr:
        src = self.src
        if not src or not src.strip():
            raise self.fail("empty path")
        steps: list[Step] = []
        absolute = False
        if self.eat("//"):
            steps.append(self.step(DESCENDANT))
        elif self.eat("/"):
            absolute = True
            steps.append(self.step(CHILD))
        else:
            while self.peek(".."):
                start = self.pos
                self.pos += 2
                if self.peek("."):
                    raise self.fail("unexpected '.'")
                steps.append(Step(PARENT))
                if self.pos == len(src):
                    return PathExpr(tuple(steps), None, False, src)
                if self.peek("//"):
                    raise self.fail("descendant search is not allowed after '..'")
                if not self.eat("/"):
                    raise self.fail("expected '/' after '..'", start + 2)
            terminal = self.terminal()
            if terminal is not None:
                return self.finish(steps, terminal, absolute)
            steps.append(self.step(CHILD))
        while self.pos < len(src):
            if self.peek("//"):
                raise self.fail("descendant search is only allowed at the start of a path")
            self.expect("/")
            terminal = self.terminal()
            if terminal is not None:
                return self.finish(steps, terminal, absolute)
            if self.peek(".."):
                raise self.fail("'..' is only allowed at the start of a relative path")
            steps.append(self.step(CHILD))
        return PathExpr(tuple(steps), None, absolute, src)

    def finish(self, steps: list[Step], terminal: tuple[str, str], absolute: bool) -> PathExpr:
        if self.pos != len(self.src):
            raise self.fail("trailing characters after terminal")
        return PathExpr(tuple(steps), terminal, absolute, self.src)

    def terminal(self) -> tuple[str, str] | None:
        if self.eat("@"):
            return ("attribute", self.name())
        if self.eat("text()"):
            return ("text", "")
        return None

    def step(self, axis: str) -> Step:
        if self.eat("*"):
            name_test = "*"
        else:
            start = self.pos
            name_test = self.name()
            if self.peek("(") or self.peek("::"):
                raise self.fail("functions and explicit axes are not supported", start)
        predicates = []
        while self.eat("["):
            predicates.append(self.predicate())
        return Step(axis, name_test, tuple(predicates))

    def predicate(self) -> Predicate:
        self.skip_ws()
        start = self.pos
        if self.eat("@"):
            attr = self.name()
            self.skip_ws()
            if self.eat("]"):
                return Predicate("attr-exists", name=attr)
            self.expect("=")
            self.skip_ws()
            quote = self.src[self.pos : self.pos + 1]
            if quote not in ("'", '"'):
                raise self.fail("expected a quoted literal")
            end = self.src.find(quote, self.pos + 1)
            if end < 0:
                raise self.fail("unterminated literal")
            value = self.src[self.pos + 1 : end]
            self.pos = end + 1
            self.skip_ws()
            self.expect("]")
            return Predicate("attr-equals", name=attr, value=value)
        m = _INT.match(self.src, self.pos)
        if not m:
            raise self.fail("unsupported predicate", start)
        self.pos = m.end()
        self.skip_ws()
        self.expect("]")
        index = int(m.group())
        if index < 1:
            raise self.fail("positions start at 1", start)
        return Predicate("position", index=index)


def parse_path(src: str) -> PathExpr:
    """Parse ``src``; raises :class:`PathSyntaxError` with the failing offset."""
    return _PathParser(src).parse()


def _name_matches(element: Element, name_test: str) -> bool:
    return name_test == "*" or element.name == name_test


def _apply_predicates(candidates: list[Element], predicates: tuple[Predicate, ...]) -> list[Element]:
    for pred in predicates:
        if pred.kind == "position":
            candidates = candidates[pred.index - 1 : pred.index]
        elif pred.kind == "attr-exists":
            candidates = [c for c in candidates if pred.name in c.attributes]
        else:
            candidates = [c for c in candidates if c.attributes.get(pred.name) == pred.value]
    return candidates


def _document_order(root: Element) -> dict[int, int]:
    return {id(e): i for i, e in enumerate(root.iter())}


def evaluate(path: PathExpr | str, context: Element) -> list[Element] | list[str]:
    """Evaluate ``path`` against ``context``.

    Returns elements in document order, or strings for ``@attr`` and
    ``text()`` terminals.  Raises :class:`NavigationError` when ``..`` climbs
    above the document root.
    """
    if isinstance(path, str):
        path = parse_path(path)
    root = context.root()
    current: list[Element] = [context]
    steps = path.steps
    if path.absolute:
        first = steps[0]
        current = _apply_predicates([root] if _name_matches(root, first.name_test) else [], first.predicates)
        steps = steps[1:]
    order: dict[int, int] | None = None
    for step in steps:
        if step.axis == PARENT:
            parents: list[Element] = []
            seen: set[int] = set()
            for node in current:
                if node.parent is None:
                    raise NavigationError(f"'..' applied at the document root in {path}")
                if id(node.parent) not in seen:
                    seen.add(id(node.parent))
                    parents.append(node.parent)
            current = parents
        elif step.axis == DESCENDANT:
            groups: dict[int, list[Element]] = {}
            for element in root.iter():
                if _name_matches(element, step.name_test):
                    groups.setdefault(id(element.parent), []).append(element)
            selected = {id(e) for group in groups.values() for e in _apply_predicates(group, step.predicates)}
            current = [e for e in root.iter() if id(e) in selected]
        else:
            result: list[Element] = []
            for node in current:
                matched = [c for c in node.element_children() if _name_matches(c, step.name_test)]
                result.extend(_apply_predicates(matched, step.predicates))
            if len(current) > 1:
                if order is None:
                    order = _document_order(root)
                unique = {id(e): e for e in result}
                result = sorted(unique.values(), key=lambda e: order[id(e)])
            current = result
    if len(current) > 1:
        if order is None:
            order = _document_order(root)
        current = sorted({id(e): e for e in current}.values(), key=lambda e: order[id(e)])
    if path.terminal is None:
        return current
    kind, name = path.terminal
    if kind == "attribute":
        return [e.attributes[name] for e in current if name in e.attributes]
    return [e.text_content() for e in current]


def string_value(node: Element | Text | Document | str) -> str:
    """Trimmed text of an element; attribute strings are returned verbatim."""
    if isinstance(node, str):
        return node
    if isinstance(node, Document):
        node = node.root
    if isinstance(node, Text):
        return node.text.strip()
    return node.text_content().strip()
