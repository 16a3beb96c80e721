"""Rule-based XML validation and correction with SRML 2.0 rules embedded in XSD."""

from .errors import (
    ContextError,
    CycleError,
    EvalError,
    IngestError,
    NavigationError,
    PathSyntaxError,
    RuleSyntaxError,
    SchemaError,
    SrmlError,
    TemplateSyntaxError,
    WellFormednessError,
)
from .expr import EvalContext, coerce_bool, eval_expr, eval_template, values_equal
from .paths import PathExpr, evaluate, parse_path, string_value
from .relational import RowOp, TableStore, apply_op, build_context, fire_trigger, load_csv
from .rules import RuleSet, parse_ruleset, parse_standalone, ruleset_to_xml
from .schema import Finding, Schema, extract_srml, parse_schema, validate_structure
from .validator import (
    ValidationOptions,
    ValidationReport,
    load_schema_and_rules,
    render_report,
    validate,
    validate_file,
)
from .xmltree import Document, Element, Text, node_location, parse_document, parse_file, serialize, set_value

__version__ = "0.1.0"
