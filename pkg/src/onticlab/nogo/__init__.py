"""Non-overlap arguments: checked proof traces and finite model search."""

from .search import AXIOMS, FULL_AXIOMS, FeasibilityProblem, Sat, Unsat, feasibility_search
from .setexpr import Assertion, Atom, Empty, Inter, Union_, entails, parse_assertion, parse_expr
from .trace import ProofTrace, Step, TraceCheck, check_trace, derive_nonoverlap

__all__ = [
    "AXIOMS",
    "FULL_AXIOMS",
    "Assertion",
    "Atom",
    "Empty",
    "FeasibilityProblem",
    "Inter",
    "ProofTrace",
    "Sat",
    "Step",
    "TraceCheck",
    "Union_",
    "Unsat",
    "check_trace",
    "derive_nonoverlap",
    "entails",
    "feasibility_search",
    "parse_assertion",
    "parse_expr",
]
