"""Lexer and recursive-descent parser for ``.mimp`` sources.

The concrete syntax is a Java subset.  Contracts live in ``/*@ ... @*/``
comments (``@`` signs inside them are ignored, as in JML) and use
``requires``, ``ensures``, ``\\result``, ``==>``,
``\\forall int i; range; body`` and ``\\alldifferent a``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import ast as A


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: tuple = ()):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


@dataclass
class Token:
    kind: str  # 'id', 'int', 'op', 'kw', 'annot', 'endannot', 'eof'
    text: str
    line: int
    col: int


KEYWORDS = {
    "int", "boolean", "void", "if", "else", "while", "for", "return", "true", "false",
    "class", "static", "public", "private", "requires", "ensures",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<annot>/\*@|//@)
  | (?P<comment>/\*.*?\*/|//[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<special>\\(?:result|forall|alldifferent))
  | (?P<op>==>|\+\+|--|\+=|-=|&&|\|\||==|!=|<=|>=|[-+*/<>=!(){}\[\];,.])
""", re.VERBOSE | re.DOTALL)


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    in_annot: Optional[str] = None  # '*/' or '\n'

    def here(p):
        return line, p - line_start + 1

    def advance_lines(text, start):
        nonlocal line, line_start
        i = text.rfind("\n")
        if i >= 0:
            line += text.count("\n")
            line_start = start + i + 1

    while pos < n:
        if in_annot is not None:
            # inside an annotation: '@' is layout, the closer ends it
            if in_annot == "*/" and source.startswith("@*/", pos):
                toks.append(Token("endannot", "*/", *here(pos)))
                pos += 3
                in_annot = None
                continue
            if in_annot == "*/" and source.startswith("*/", pos):
                toks.append(Token("endannot", "*/", *here(pos)))
                pos += 2
                in_annot = None
                continue
            if in_annot == "\n" and source[pos] == "\n":
                toks.append(Token("endannot", "\n", *here(pos)))
                in_annot = None
                continue
            if source[pos] == "@":
                pos += 1
                continue
        m = _TOKEN_RE.match(source, pos)
        if not m:
            ln, col = here(pos)
            raise ParseError(f"unexpected character {source[pos]!r}", ln, col)
        kind = m.lastgroup
        text = m.group()
        ln, col = here(pos)
        if kind == "ws" or kind == "comment":
            if in_annot == "\n" and "\n" in text:
                toks.append(Token("endannot", "\n", ln, col))
                in_annot = None
        elif kind == "annot":
            if in_annot is not None:
                raise ParseError("nested annotation", ln, col)
            toks.append(Token("annot", text, ln, col))
            in_annot = "*/" if text == "/*@" else "\n"
        elif kind == "int":
            toks.append(Token("int", text, ln, col))
        elif kind == "id":
            toks.append(Token("kw" if text in KEYWORDS else "id", text, ln, col))
        else:
            toks.append(Token("op", text, ln, col))
        advance_lines(text, pos)
        pos = m.end()
    if in_annot == "*/":
        raise ParseError("unterminated annotation", line, pos - line_start + 1)
    if in_annot == "\n":
        toks.append(Token("endannot", "\n", line, pos - line_start + 1))
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/"),
]


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.in_contract = False

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def error(self, expected) -> ParseError:
        t = self.tok
        got = "end of input" if t.kind == "eof" else repr(t.text)
        exp = tuple(expected)
        return ParseError(f"expected {' or '.join(exp)}, got {got}", t.line, t.col, exp)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error([repr(text)])
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id":
            raise self.error(["identifier"])
        self.i += 1
        return t.text

    def pos(self):
        return (self.tok.line, self.tok.col)

    # -- top level

    def parse_unit(self) -> A.Unit:
        funcs = []
        while self.tok.kind != "eof":
            if self.at("class"):
                self.i += 1
                self.ident()
                self.expect("{")
                while not self.at("}"):
                    funcs.append(self.parse_function())
                self.expect("}")
            else:
                funcs.append(self.parse_function())
        if not funcs:
            raise self.error(["function"])
        return A.Unit(tuple(funcs))

    def parse_contract(self) -> A.Contract:
        requires: list = []
        ensures: list = []
        while self.tok.kind == "annot":
            self.i += 1
            self.in_contract = True
            while self.tok.kind != "endannot":
                if self.accept("requires"):
                    requires.append(to_formula(self.parse_expr()))
                elif self.accept("ensures"):
                    ensures.append(to_formula(self.parse_expr()))
                else:
                    raise self.error(["'requires'", "'ensures'"])
                self.accept(";")
            self.i += 1
            self.in_contract = False
        return A.Contract(_conj(requires), _conj(ensures))

    def parse_function(self) -> A.Program:
        contract = self.parse_contract()
        while self.at("static", "public", "private"):
            self.i += 1
        pos = self.pos()
        rtype = self.parse_type(allow_void=True)
        name = self.ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                ptype = self.parse_type()
                params.append(A.Param(self.ident(), ptype))
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.parse_block()
        return A.Program(name, tuple(params), rtype, body, contract, pos=pos)

    def parse_type(self, allow_void: bool = False) -> str:
        if self.accept("int"):
            if self.at("[") and self.peek().text == "]":
                self.i += 2
                return A.INT_ARRAY
            return A.INT
        if self.accept("boolean"):
            return A.BOOL
        if allow_void and self.accept("void"):
            return A.VOID
        raise self.error(["type"])

    # -- statements

    def parse_block(self) -> A.Block:
        pos = self.pos()
        self.expect("{")
        stmts = []
        while not self.at("}"):
            stmts.append(self.parse_stmt())
        self.expect("}")
        return A.Block(tuple(stmts), pos=pos)

    def parse_stmt(self):
        pos = self.pos()
        if self.at("{"):
            return self.parse_block()
        if self.accept("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_stmt()
            orelse = self.parse_stmt() if self.accept("else") else None
            return A.If(cond, then, orelse, pos=pos)
        if self.accept("while"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return A.While(cond, self.parse_stmt(), pos=pos)
        if self.accept("for"):
            self.expect("(")
            init = None if self.at(";") else self.parse_simple()
            self.expect(";")
            cond = None if self.at(";") else self.parse_expr()
            self.expect(";")
            step = None if self.at(")") else self.parse_simple()
            self.expect(")")
            return A.For(init, cond, step, self.parse_stmt(), pos=pos)
        if self.accept("return"):
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return A.Return(value, pos=pos)
        s = self.parse_simple()
        self.expect(";")
        return s

    def parse_simple(self):
        """Declaration or assignment without the trailing ';'."""
        pos = self.pos()
        if self.at("int", "boolean"):
            typ = self.parse_type()
            name = self.ident()
            init = self.parse_expr() if self.accept("=") else None
            return A.Decl(name, typ, init, pos=pos)
        name = self.ident()
        if self.accept("["):
            index = self.parse_expr()
            self.expect("]")
            self.expect("=")
            return A.ArrayAssign(name, index, self.parse_expr(), pos=pos)
        if self.accept("++"):
            return A.Assign(name, A.Binary("+", A.VarRef(name, pos=pos), A.IntLit(1)), pos=pos)
        if self.accept("--"):
            return A.Assign(name, A.Binary("-", A.VarRef(name, pos=pos), A.IntLit(1)), pos=pos)
        for op in ("+=", "-="):
            if self.accept(op):
                return A.Assign(name, A.Binary(op[0], A.VarRef(name, pos=pos), self.parse_expr()), pos=pos)
        if not self.at("="):
            raise self.error(["'='", "'['", "'++'", "'--'"])
        self.i += 1
        value = self.parse_expr()
        if isinstance(value, A.Call):
            return A.CallAssign(name, value.callee, value.args, pos=pos)
        return A.Assign(name, value, pos=pos)

    # -- expressions

    def parse_expr(self):
        lhs = self.parse_binary(0)
        if self.at("==>"):
            if not self.in_contract:
                raise self.error(["expression"])
            pos = self.pos()
            self.i += 1
            return A.Binary("==>", lhs, self.parse_expr(), pos=pos)
        return lhs

    def parse_binary(self, level: int):
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        ops = _BINARY_LEVELS[level]
        left = self.parse_binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in ops:
            pos = self.pos()
            op = self.tok.text
            self.i += 1
            left = A.Binary(op, left, self.parse_binary(level + 1), pos=pos)
        return left

    def parse_unary(self):
        pos = self.pos()
        if self.accept("!"):
            return A.Unary("!", self.parse_unary(), pos=pos)
        if self.accept("-"):
            return A.Unary("-", self.parse_unary(), pos=pos)
        return self.parse_primary()

    def parse_primary(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "int":
            self.i += 1
            return A.IntLit(int(t.text), pos=pos)
        if self.accept("true"):
            return A.BoolLit(True, pos=pos)
        if self.accept("false"):
            return A.BoolLit(False, pos=pos)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "op" and t.text.startswith("\\"):
            if not self.in_contract:
                raise ParseError(f"{t.text} is only allowed in contracts", t.line, t.col)
            self.i += 1
            if t.text == "\\result":
                return A.ResultRef(pos=pos)
            if t.text == "\\alldifferent":
                return _AllDiffExpr(self.ident(), pos)
            self.parse_type()
            var = self.ident()
            self.expect(";")
            rng = self.parse_expr()
            self.expect(";")
            body = self.parse_expr()
            return _ForAllExpr(var, rng, body, pos)
        if t.kind == "id":
            name = self.ident()
            if self.accept("("):
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept(","):
                            break
                self.expect(")")
                return A.Call(name, tuple(args), pos=pos)
            if self.accept("["):
                index = self.parse_expr()
                self.expect("]")
                return A.ArrayRead(name, index, pos=pos)
            if self.accept("."):
                field = self.ident()
                if field != "length":
                    raise ParseError(f"unknown field {field!r}", t.line, t.col)
                return A.LengthOf(name, pos=pos)
            return A.VarRef(name, pos=pos)
        raise self.error(["expression"])


@dataclass(frozen=True)
class _ForAllExpr:
    var: str
    range: object
    body: object
    pos: object


@dataclass(frozen=True)
class _AllDiffExpr:
    array: str
    pos: object


def _conj(fs: list):
    if not fs:
        return A.TRUE
    if len(fs) == 1:
        return fs[0]
    flat = []
    for f in fs:
        flat.extend(f.args if isinstance(f, A.And) else (f,))
    return A.And(tuple(flat))


def _flatten(op: str, e) -> list:
    if isinstance(e, A.Binary) and e.op == op:
        return _flatten(op, e.left) + _flatten(op, e.right)
    return [e]


def _mentions(e, var: str) -> bool:
    if isinstance(e, A.VarRef):
        return e.name == var
    if isinstance(e, A.ArrayRead):
        return _mentions(e.index, var)
    if isinstance(e, A.Unary):
        return _mentions(e.operand, var)
    if isinstance(e, A.Binary):
        return _mentions(e.left, var) or _mentions(e.right, var)
    if isinstance(e, A.Call):
        return any(_mentions(a, var) for a in e.args)
    return False


def _plus_one(e):
    if isinstance(e, A.Binary) and e.op == "-" and e.right == A.IntLit(1):
        return e.left
    return A.Binary("+", e, A.IntLit(1))


def _range_bounds(var: str, rng, pos):
    low = high = None
    guards = []
    for c in _flatten("&&", rng):
        bound = None
        if isinstance(c, A.Binary) and c.op in A.CMP_OPS:
            l_is = c.left == A.VarRef(var) and not _mentions(c.right, var)
            r_is = c.right == A.VarRef(var) and not _mentions(c.left, var)
            if l_is or r_is:
                op, other = (c.op, c.right) if l_is else ({"<": ">", "<=": ">=", ">": "<", ">=": "<="}[c.op], c.left)
                bound = {
                    ">=": ("low", other), ">": ("low", _plus_one(other)),
                    "<": ("high", other), "<=": ("high", _plus_one(other)),
                }[op]
        if bound is None:
            guards.append(c)
        elif bound[0] == "low" and low is None:
            low = bound[1]
        elif bound[0] == "high" and high is None:
            high = bound[1]
        else:
            guards.append(c)
    if low is None or high is None:
        line, col = pos or (0, 0)
        raise ParseError(f"quantifier over {var} needs a lower and an upper bound", line, col)
    return low, high, guards


def to_formula(e) -> A.Formula:
    """Turn a parsed contract expression into formula structure."""
    pos = getattr(e, "pos", None)
    if isinstance(e, A.Binary):
        if e.op == "&&":
            return A.And(tuple(to_formula(x) for x in _flatten("&&", e)), pos=pos)
        if e.op == "||":
            return A.Or(tuple(to_formula(x) for x in _flatten("||", e)), pos=pos)
        if e.op == "==>":
            return A.Implies(to_formula(e.left), to_formula(e.right), pos=pos)
    if isinstance(e, A.Unary) and e.op == "!":
        return A.Not(to_formula(e.operand), pos=pos)
    if isinstance(e, _ForAllExpr):
        low, high, guards = _range_bounds(e.var, e.range, e.pos)
        body = to_formula(e.body)
        if guards:
            body = A.Implies(to_formula(_and_all(guards)), body)
        return A.ForAll(e.var, low, high, body, pos=e.pos)
    if isinstance(e, _AllDiffExpr):
        return A.AllDifferent(e.array, pos=e.pos)
    _reject_formula_parts(e)
    return A.Atom(e, pos=pos)


def _and_all(es):
    out = es[0]
    for x in es[1:]:
        out = A.Binary("&&", out, x)
    return out


def _reject_formula_parts(e) -> None:
    if isinstance(e, (_ForAllExpr, _AllDiffExpr)):
        line, col = e.pos or (0, 0)
        raise ParseError("quantifier used inside an arithmetic expression", line, col)
    if isinstance(e, A.Binary):
        if e.op == "==>":
            line, col = e.pos or (0, 0)
            raise ParseError("'==>' used inside an arithmetic expression", line, col)
        _reject_formula_parts(e.left)
        _reject_formula_parts(e.right)
    elif isinstance(e, A.Unary):
        _reject_formula_parts(e.operand)
    elif isinstance(e, A.ArrayRead):
        _reject_formula_parts(e.index)


def parse_unit(source: str) -> A.Unit:
    return Parser(source).parse_unit()


def parse_program(source: str, function: Optional[str] = None) -> A.Program:
    """Parse ``source`` and return one function (the first by default)."""
    unit = parse_unit(source)
    if function is None:
        return unit.main
    try:
        return unit.get(function)
    except KeyError:
        raise ParseError(f"no function named {function!r}", 1, 1) from None
