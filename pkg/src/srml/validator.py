"""The two-phase pipeline: structural check, then SRML rules.

Each rule computes the value its target *should* hold.  A rule passes when
that expected value compares equal to the value found in the document; in
``correct`` mode a failing target is overwritten with the expected value and
later rules see the new value.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EvalError
from .expr import EvalContext, eval_expr, format_value, values_equal
from .paths import string_value
from .rules import RuleDef, RuleSet, merge_rulesets, parse_ruleset
from .schema import Finding, Schema, extract_srml, parse_schema, validate_structure
from .xmltree import Document, Element, node_location, parse_file, set_value

__all__ = [
    "Finding",
    "ValidationOptions",
    "ValidationReport",
    "validate",
    "validate_file",
    "apply_rules",
    "render_report",
    "load_schema_and_rules",
]


@dataclass(frozen=True)
class ValidationOptions:
    apply_corrections: bool = True
    fail_fast: bool = False
    # print computed numbers with one decimal ("1125.0"), as database reports do
    decimal_numbers: bool = False


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)
    corrections_applied: int = 0

    @property
    def valid(self) -> bool:
        return not any(f.severity in ("error", "structural") for f in self.findings)

    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]


class _Stop(Exception):
    pass


class _RuleRunner:
    def __init__(
        self,
        report: ValidationReport,
        opts: ValidationOptions,
        may_correct: Callable[[Element], bool],
    ):
        self.report = report
        self.opts = opts
        self.may_correct = may_correct

    def add(self, finding: Finding) -> None:
        self.report.findings.append(finding)
        if finding.severity == "error" and self.opts.fail_fast:
            raise _Stop

    def fmt(self, value) -> str:
        return format_value(value, self.opts.decimal_numbers)

    def run_def(self, owner: Element, rule: RuleDef) -> None:
        if rule.is_attribute:
            if rule.target in owner.attributes:
                self.check(owner, rule, owner, owner.attributes[rule.target])
            else:
                self.missing(owner, rule)
            return
        targets = [c for c in owner.element_children() if c.name == rule.target]
        if not targets:
            self.missing(owner, rule)
        for target in targets:
            self.check(owner, rule, target, string_value(target))

    def location(self, owner: Element, rule: RuleDef, target: Element | None) -> str:
        if rule.is_attribute:
            return node_location(owner, rule.target)
        if target is None:
            return node_location(owner) + f"/{rule.target}"
        return node_location(target)

    def eval_error(self, location: str, found: str, index: int, exc: EvalError) -> None:
        self.add(Finding("error", f"evaluation error: {exc}", location, found, "", index))

    def check(self, owner: Element, rule: RuleDef, context: Element, found: str) -> None:
        target = None if rule.is_attribute else context
        location = self.location(owner, rule, target)
        ctx = EvalContext(context, found)
        first_expected = None
        failing: tuple[int, object] | None = None
        for index, instance in enumerate(rule.instances):
            try:
                expected = eval_expr(instance.expr, ctx)
            except EvalError as exc:
                self.eval_error(location, found, index, exc)
                return
            if index == 0:
                first_expected = expected
            ok = values_equal(expected, found)
            if rule.match == "any" and ok:
                return
            if rule.match == "all" and not ok:
                failing = (index, expected)
                break
        if rule.match == "all" and failing is None:
            return
        index, expected = failing if rule.match == "all" else (0, first_expected)
        message = rule.instances[index].message
        expected_text = self.fmt(expected)
        if rule.mode == "correct" and self.opts.apply_corrections and self.may_correct(owner):
            if rule.is_attribute:
                set_value(owner, expected_text, attribute=rule.target)
            else:
                set_value(context, expected_text)
            self.report.corrections_applied += 1
            self.add(Finding("corrected", message, location, found, expected_text, index))
        else:
            self.add(Finding("error", message, location, found, expected_text, index))

    def missing(self, owner: Element, rule: RuleDef) -> None:
        location = self.location(owner, rule, None)
        try:
            expected = eval_expr(rule.instances[0].expr, EvalContext(owner, ""))
        except EvalError as exc:
            self.eval_error(location, "", 0, exc)
            return
        expected_text = self.fmt(expected)
        if rule.mode == "correct" and self.opts.apply_corrections and self.may_correct(owner):
            if rule.is_attribute:
                set_value(owner, expected_text, attribute=rule.target)
            else:
                set_value(owner.append(Element(rule.target)), expected_text)  # type: ignore[arg-type]
            self.report.corrections_applied += 1
            self.add(Finding("corrected", "target missing", location, "", expected_text, 0))
        else:
            self.add(Finding("error", "target missing", location, "", expected_text, 0))


def apply_rules(
    doc: Document,
    rules: RuleSet,
    opts: ValidationOptions,
    report: ValidationReport | None = None,
    *,
    scope: Iterable[Element] | None = None,
    may_correct: Callable[[Element], bool] | None = None,
) -> ValidationReport:
    """Run the rule phase on ``doc`` in place.

    ``scope`` restricts which matched root elements are checked (by
    identity); ``may_correct`` vetoes corrections per owning element, turning
    them into errors.
    """
    report = report if report is not None else ValidationReport()
    allowed = None if scope is None else {id(e) for e in scope}
    runner = _RuleRunner(report, opts, may_correct or (lambda _: True))
    try:
        for group in rules.groups:
            owners = [e for e in doc.root.iter() if e.name == group.root]
            for owner in owners:
                if allowed is not None and id(owner) not in allowed:
                    continue
                for rule in group.defs:
                    runner.run_def(owner, rule)
    except _Stop:
        pass
    return report


def validate(
    doc: Document,
    schema: Schema | None,
    rules: RuleSet | None,
    opts: ValidationOptions | None = None,
) -> tuple[ValidationReport, Document]:
    """Validate a copy of ``doc``; returns the report and the (corrected) copy."""
    opts = opts or ValidationOptions()
    working = doc.clone()
    report = ValidationReport()
    if schema is not None:
        report.findings.extend(validate_structure(working, schema))
        if opts.fail_fast and not report.valid:
            return report, working
    if rules is not None:
        apply_rules(working, rules, opts, report)
    return report, working


def load_schema_and_rules(xsd_path: str | Path) -> tuple[Schema, RuleSet | None]:
    schema = parse_schema(parse_file(xsd_path))
    sources = extract_srml(schema)
    if not sources:
        return schema, None
    return schema, merge_rulesets([parse_ruleset(src) for src in sources])


def validate_file(
    xml_path: str | Path, xsd_path: str | Path, opts: ValidationOptions | None = None
) -> tuple[ValidationReport, Document]:
    doc = parse_file(xml_path)
    schema, rules = load_schema_and_rules(xsd_path)
    return validate(doc, schema, rules, opts)


def render_report(report: ValidationReport, format: str = "text") -> bytes:
    if format == "json":
        payload = [f.to_json() for f in report.findings]
        return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    if not report.findings:
        return b"OK\n"
    lines = []
    for f in report.findings:
        label = {"error": "Validation Error", "corrected": "Corrected", "structural": "Structural Error"}[f.severity]
        lines.append(f"{label}. Message=[{f.rule_message}]. Found=[{f.found}]. Expecting=[{f.expected}].")
        lines.append(f"  at {f.target_location}")
    return ("\n".join(lines) + "\n").encode("utf-8")
