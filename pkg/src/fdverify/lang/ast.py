"""AST for the annotated mini imperative language.

Nodes are frozen dataclasses; source positions are carried but excluded from
equality so that re-parsed pretty-printed programs compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

INT = "int"
BOOL = "boolean"
INT_ARRAY = "int[]"
VOID = "void"

Pos = Optional[tuple[int, int]]


def _pos():
    return field(default=None, compare=False, repr=False)


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class VarRef:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class ArrayRead:
    name: str
    index: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class LengthOf:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # '-' or '!'
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    callee: str
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class ResultRef:
    pos: Pos = _pos()


Expr = Union[IntLit, BoolLit, VarRef, ArrayRead, LengthOf, Unary, Binary, Call, ResultRef]

ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("<", "<=", ">", ">=")
EQ_OPS = ("==", "!=")
LOGIC_OPS = ("&&", "||")


# --- contract formulas -----------------------------------------------------

@dataclass(frozen=True)
class Atom:
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Not:
    arg: "Formula"
    pos: Pos = _pos()


@dataclass(frozen=True)
class And:
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class Or:
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"
    pos: Pos = _pos()


@dataclass(frozen=True)
class ForAll:
    var: str
    low: Expr   # inclusive
    high: Expr  # exclusive
    body: "Formula"
    pos: Pos = _pos()


@dataclass(frozen=True)
class AllDifferent:
    array: str
    pos: Pos = _pos()


Formula = Union[Atom, Not, And, Or, Implies, ForAll, AllDifferent]

TRUE = Atom(BoolLit(True))


@dataclass(frozen=True)
class Contract:
    requires: Formula = TRUE
    ensures: Formula = TRUE


# --- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Decl:
    name: str
    type: str
    init: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ArrayAssign:
    name: str
    index: Expr
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class CallAssign:
    name: str
    callee: str
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    pos: Pos = _pos()


@dataclass(frozen=True)
class For:
    init: Optional["Stmt"]
    cond: Optional[Expr]
    step: Optional["Stmt"]
    body: "Stmt"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Block:
    stmts: tuple
    pos: Pos = _pos()


Stmt = Union[Decl, Assign, ArrayAssign, CallAssign, If, While, For, Return, Block]


@dataclass(frozen=True)
class Param:
    name: str
    type: str


@dataclass(frozen=True)
class Program:
    """One annotated function."""

    name: str
    params: tuple
    result_type: str
    body: Block
    contract: Contract = Contract()
    pos: Pos = _pos()

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None

    @property
    def array_params(self) -> list[str]:
        return [p.name for p in self.params if p.type == INT_ARRAY]


@dataclass(frozen=True)
class Unit:
    """All functions of one source file, in order."""

    functions: tuple

    def get(self, name: str) -> Program:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def main(self) -> Program:
        return self.functions[0]
