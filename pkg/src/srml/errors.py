"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SrmlError(Exception):
    """Base class for every error raised by this package."""


class WellFormednessError(SrmlError):
    def __init__(self, message: str, line: int, column: int, source: str = "<bytes>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.reason = message
        self.line = line
        self.column = column
        self.source = source


class PathSyntaxError(SrmlError):
    def __init__(self, message: str, source: str, offset: int):
        super().__init__(f"{message} at offset {offset} in {source!r}")
        self.reason = message
        self.source = source
        self.offset = offset


class NavigationError(SrmlError):
    pass


class SchemaError(SrmlError):
    pass


class RuleSyntaxError(SrmlError):
    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{message} ({location})" if location else message)
        self.reason = message
        self.location = location


class TemplateSyntaxError(SrmlError):
    def __init__(self, message: str, template: str, offset: int):
        super().__init__(f"{message} at offset {offset} in template {template!r}")
        self.reason = message
        self.template = template
        self.offset = offset


class EvalError(SrmlError):
    """Raised while computing an expected value.

    ``kind`` is one of ``path-unresolved``, ``type``, ``not-numeric``,
    ``division-by-zero`` or ``overflow``.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.detail = message


class IngestError(SrmlError):
    pass


class ContextError(SrmlError):
    pass


class CycleError(ContextError):
    pass
