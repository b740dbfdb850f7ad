"""Bounded verification of annotated programs by symbolic execution over a
finite-domain constraint store."""
from .engine import Counterexample, ResourceExceeded, TraceEntry, Verified, verify
from .interp import concrete_interpret
from .lang.parser import ParseError, parse_program, parse_unit
from .lang.typecheck import TypeCheckError, TypedProgram, typecheck
from .translate import InstanceParams

__all__ = [
    "Counterexample", "InstanceParams", "ParseError", "ResourceExceeded", "TraceEntry",
    "TypeCheckError", "TypedProgram", "Verified", "concrete_interpret", "load",
    "parse_program", "parse_unit", "typecheck", "verify",
]


def load(source: str, function: str | None = None) -> TypedProgram:
    """Parse and typecheck ``source``; checks its first function by default."""
    unit = parse_unit(source)
    return typecheck(unit.get(function) if function else unit.main, unit)
