"""Verification toolchain for architecture patterns.

Write a pattern in the `.arch` language (or take a built-in one), validate
it, check its LTL guarantees with the embedded explicit-state checker and
emit SMV text for external tools.
"""

__version__ = "0.1.0"

from .model import Diagnostic, PatternSpec, Property, SourceSpan  # noqa: E402
from .parser import ParseResult, parse_ltl, parse_pattern, pretty_print  # noqa: E402
from .validate import has_errors, validate_spec  # noqa: E402
from .semantics import (  # noqa: E402
    MissingBranch, RangeError, ReachabilityReport, SemanticsError, StepLabel, initial_states,
    reachable, successors,
)
from .buchi import BuchiAutomaton, to_buchi  # noqa: E402
from .checker import (  # noqa: E402
    Inconclusive, Lasso, Limits, Stats, UnknownProperty, Verdict, check_all, check_formula,
    check_property,
)
from .certify import diagnose_lasso, verify_lasso  # noqa: E402
from .smv import (  # noqa: E402
    SmvDocument, UnsupportedAtom, emit_file, emit_ltlspecs, emit_main, emit_module,
)
from .patterns import (  # noqa: E402
    PatternCatalogEntry, PropertyFamily, UnknownPattern, expand_properties, get_pattern,
)

__all__ = [
    "BuchiAutomaton", "Diagnostic", "Inconclusive", "Lasso", "Limits", "MissingBranch",
    "ParseResult", "PatternCatalogEntry", "PatternSpec", "Property", "PropertyFamily",
    "RangeError", "ReachabilityReport", "SemanticsError", "SmvDocument", "SourceSpan", "Stats",
    "StepLabel", "UnknownPattern", "UnknownProperty", "UnsupportedAtom", "Verdict",
    "check_all", "check_formula", "check_property", "diagnose_lasso", "emit_file",
    "emit_ltlspecs", "emit_main", "emit_module", "expand_properties", "get_pattern",
    "has_errors", "initial_states", "parse_ltl", "parse_pattern", "pretty_print", "reachable",
    "successors", "to_buchi", "validate_spec", "verify_lasso",
]
