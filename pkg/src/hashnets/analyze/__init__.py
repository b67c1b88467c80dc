"""Analysis layer: CTL model checking, formula macros, deadlock reports."""

from hashnets.analyze.ctl import (
    AF,
    AG,
    AU,
    AX,
    EF,
    EG,
    EU,
    EX,
    And,
    Atom,
    CheckResult,
    Const,
    CtlError,
    DeadTransition,
    Implies,
    Not,
    Or,
    ParseError,
    TruncatedGraph,
    check_ctl,
    parse_formula,
)
from hashnets.analyze.macros import (
    ArityMismatch,
    MacroDef,
    MacroError,
    MacroLib,
    UnknownMacro,
    expand_macros,
    expand_text,
    parse_macro_file,
)
from hashnets.analyze.reports import (
    DeadlockReport,
    InvariantReport,
    check_place_invariants,
    find_deadlocks,
)

__all__ = [
    "AF", "AG", "AU", "AX", "EF", "EG", "EU", "EX",
    "And", "Atom", "CheckResult", "Const", "CtlError", "DeadTransition",
    "Implies", "Not", "Or", "ParseError", "TruncatedGraph",
    "check_ctl", "parse_formula",
    "ArityMismatch", "MacroDef", "MacroError", "MacroLib", "UnknownMacro",
    "expand_macros", "expand_text", "parse_macro_file",
    "DeadlockReport", "InvariantReport", "check_place_invariants", "find_deadlocks",
]
