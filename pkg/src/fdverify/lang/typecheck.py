"""Scope and type checking, plus ``for`` desugaring."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from . import ast as A


@dataclass(frozen=True)
class TypeIssue:
    message: str
    pos: A.Pos = None

    def __str__(self):
        if self.pos:
            return f"{self.pos[0]}:{self.pos[1]}: {self.message}"
        return self.message


class TypeCheckError(Exception):
    def __init__(self, issues: list[TypeIssue]):
        super().__init__("; ".join(str(i) for i in issues))
        self.issues = issues


@dataclass(frozen=True)
class TypedProgram:
    program: A.Program
    unit: A.Unit
    var_types: dict = field(compare=False)

    @property
    def name(self) -> str:
        return self.program.name

    def callee(self, name: str) -> A.Program:
        return self.unit.get(name)


class _Checker:
    def __init__(self, unit: A.Unit, prog: A.Program):
        self.unit = unit
        self.prog = prog
        self.issues: list[TypeIssue] = []
        self.var_types: dict[str, str] = {}
        self.scopes: list[dict[str, str]] = []

    def err(self, msg, node=None):
        self.issues.append(TypeIssue(msg, getattr(node, "pos", None)))

    def lookup(self, name):
        for sc in reversed(self.scopes):
            if name in sc:
                return sc[name]
        return None

    def declare(self, name, typ, node):
        if self.lookup(name) is not None:
            self.err(f"redeclaration of {name}", node)
        prev = self.var_types.get(name)
        if prev is not None and prev != typ:
            self.err(f"{name} declared with conflicting types {prev} and {typ}", node)
        self.var_types[name] = typ
        self.scopes[-1][name] = typ

    # -- expressions

    def expr(self, e, ctx: str = "body") -> Optional[str]:
        if isinstance(e, A.IntLit):
            return A.INT
        if isinstance(e, A.BoolLit):
            return A.BOOL
        if isinstance(e, A.VarRef):
            t = self.lookup(e.name)
            if t is None:
                self.err(f"undeclared identifier {e.name}", e)
                return None
            if t == A.INT_ARRAY:
                self.err(f"array {e.name} used as a scalar", e)
                return None
            return t
        if isinstance(e, A.ResultRef):
            if ctx != "ensures":
                self.err("\\result is only allowed in ensures", e)
                return None
            if self.prog.result_type == A.VOID:
                self.err("\\result in a void function", e)
                return None
            return self.prog.result_type
        if isinstance(e, A.ArrayRead):
            self._array(e.name, e)
            if self.expr(e.index, ctx) not in (A.INT, None):
                self.err("array index must be an integer", e.index)
            return A.INT
        if isinstance(e, A.LengthOf):
            self._array(e.name, e)
            return A.INT
        if isinstance(e, A.Unary):
            t = self.expr(e.operand, ctx)
            want = A.INT if e.op == "-" else A.BOOL
            if t not in (want, None):
                self.err(f"operand of {e.op} must be {want}", e)
            return want
        if isinstance(e, A.Binary):
            lt = self.expr(e.left, ctx)
            rt = self.expr(e.right, ctx)
            if e.op in A.ARITH_OPS or e.op in A.CMP_OPS:
                for t, side in ((lt, e.left), (rt, e.right)):
                    if t not in (A.INT, None):
                        self.err(f"boolean used arithmetically in {e.op}", side)
                return A.INT if e.op in A.ARITH_OPS else A.BOOL
            if e.op in A.EQ_OPS:
                if lt and rt and lt != rt:
                    self.err(f"cannot compare {lt} with {rt}", e)
                return A.BOOL
            if e.op in A.LOGIC_OPS:
                for t, side in ((lt, e.left), (rt, e.right)):
                    if t not in (A.BOOL, None):
                        self.err(f"integer used as a condition in {e.op}", side)
                return A.BOOL
            self.err(f"unknown operator {e.op}", e)
            return None
        if isinstance(e, A.Call):
            self.err("calls are only allowed as the right-hand side of an assignment", e)
            return None
        self.err(f"unexpected expression {type(e).__name__}", e)
        return None

    def _array(self, name, node):
        t = self.lookup(name)
        if t is None:
            self.err(f"undeclared identifier {name}", node)
        elif t != A.INT_ARRAY:
            self.err(f"{name} is not an array", node)

    def cond(self, e, ctx="body"):
        t = self.expr(e, ctx)
        if t not in (A.BOOL, None):
            self.err("condition must be boolean", e)

    # -- formulas

    def formula(self, f, ctx):
        if isinstance(f, A.Atom):
            t = self.expr(f.expr, ctx)
            if t not in (A.BOOL, None):
                self.err(f"{ctx} clause is not boolean", f.expr)
        elif isinstance(f, A.Not):
            self.formula(f.arg, ctx)
        elif isinstance(f, (A.And, A.Or)):
            for g in f.args:
                self.formula(g, ctx)
        elif isinstance(f, A.Implies):
            self.formula(f.lhs, ctx)
            self.formula(f.rhs, ctx)
        elif isinstance(f, A.ForAll):
            for b in (f.low, f.high):
                if self.expr(b, ctx) not in (A.INT, None):
                    self.err("quantifier bound must be an integer", b)
            self.scopes.append({f.var: A.INT})
            self.formula(f.body, ctx)
            self.scopes.pop()
        elif isinstance(f, A.AllDifferent):
            p = self.prog.param(f.array)
            if p is None or p.type != A.INT_ARRAY:
                self.err(f"\\alldifferent needs an array parameter, got {f.array}", f)
        else:
            self.err(f"unexpected formula {type(f).__name__}", f)

    # -- statements

    def stmt(self, s):
        if isinstance(s, A.Block):
            self.scopes.append({})
            for x in s.stmts:
                self.stmt(x)
            self.scopes.pop()
        elif isinstance(s, A.Decl):
            if s.type not in (A.INT, A.BOOL):
                self.err(f"local {s.name} must be a scalar", s)
            if s.init is not None:
                if isinstance(s.init, A.Call):
                    self.call(s.init.callee, s.init.args, s.type, s)
                else:
                    t = self.expr(s.init)
                    if t and t != s.type:
                        self.err(f"cannot initialise {s.type} {s.name} with {t}", s)
            self.declare(s.name, s.type, s)
        elif isinstance(s, A.Assign):
            t = self._scalar_target(s.name, s)
            vt = self.expr(s.value)
            if t and vt and t != vt:
                self.err(f"cannot assign {vt} to {t} {s.name}", s)
        elif isinstance(s, A.CallAssign):
            t = self._scalar_target(s.name, s)
            self.call(s.callee, s.args, t, s)
        elif isinstance(s, A.ArrayAssign):
            self._array(s.name, s)
            if self.expr(s.index) not in (A.INT, None):
                self.err("array index must be an integer", s.index)
            if self.expr(s.value) not in (A.INT, None):
                self.err("array element must be an integer", s.value)
        elif isinstance(s, A.If):
            self.cond(s.cond)
            self.stmt(s.then)
            if s.orelse is not None:
                self.stmt(s.orelse)
        elif isinstance(s, A.While):
            self.cond(s.cond)
            self.stmt(s.body)
        elif isinstance(s, A.For):
            self.scopes.append({})
            if s.init is not None:
                self.stmt(s.init)
            if s.cond is not None:
                self.cond(s.cond)
            self.stmt(s.body)
            if s.step is not None:
                self.stmt(s.step)
            self.scopes.pop()
        elif isinstance(s, A.Return):
            rt = self.prog.result_type
            if s.value is None:
                if rt != A.VOID:
                    self.err("missing return value", s)
            elif rt == A.VOID:
                self.err("void function returns a value", s)
            else:
                t = self.expr(s.value)
                if t and t != rt:
                    self.err(f"returning {t} from a function of type {rt}", s)
        else:
            self.err(f"unexpected statement {type(s).__name__}", s)

    def _scalar_target(self, name, node):
        t = self.lookup(name)
        if t is None:
            self.err(f"assignment to undeclared identifier {name}", node)
        elif t == A.INT_ARRAY:
            self.err(f"cannot assign to whole array {name}", node)
            return None
        return t

    def call(self, callee, args, target_type, node):
        try:
            f = self.unit.get(callee)
        except KeyError:
            self.err(f"unknown function {callee}", node)
            return
        if f.result_type == A.VOID:
            self.err(f"{callee} returns no value", node)
        elif target_type and f.result_type != target_type:
            self.err(f"{callee} returns {f.result_type}, not {target_type}", node)
        if len(args) != len(f.params):
            self.err(f"{callee} expects {len(f.params)} arguments, got {len(args)}", node)
            return
        for a, p in zip(args, f.params):
            if p.type == A.INT_ARRAY:
                if not isinstance(a, A.VarRef):
                    self.err(f"argument for {p.name} must be an array variable", a)
                else:
                    self._array(a.name, a)
            else:
                t = self.expr(a)
                if t and t != p.type:
                    self.err(f"argument for {p.name} must be {p.type}", a)

    def run(self) -> None:
        p = self.prog
        self.scopes.append({})
        for prm in p.params:
            if prm.type == A.VOID:
                self.err(f"parameter {prm.name} cannot be void")
            self.declare(prm.name, prm.type, p)
        self.scopes.append({})
        self.formula(p.contract.requires, "requires")
        self.scopes.pop()
        self.scopes.append({})
        self.formula(p.contract.ensures, "ensures")
        self.scopes.pop()
        self.stmt(p.body)
        if p.result_type != A.VOID and not _always_returns(p.body):
            self.err(f"{p.name}: some path does not end in a return", p)


def _always_returns(s) -> bool:
    if isinstance(s, A.Return):
        return True
    if isinstance(s, A.Block):
        return any(_always_returns(x) for x in s.stmts)
    if isinstance(s, A.If):
        return s.orelse is not None and _always_returns(s.then) and _always_returns(s.orelse)
    return False


def _calls(s, acc: set) -> set:
    if isinstance(s, A.Block):
        for x in s.stmts:
            _calls(x, acc)
    elif isinstance(s, A.CallAssign):
        acc.add(s.callee)
    elif isinstance(s, A.Decl) and isinstance(s.init, A.Call):
        acc.add(s.init.callee)
    elif isinstance(s, A.If):
        _calls(s.then, acc)
        if s.orelse is not None:
            _calls(s.orelse, acc)
    elif isinstance(s, (A.While, A.For)):
        _calls(s.body, acc)
    return acc


def _check_recursion(unit: A.Unit, issues: list) -> None:
    graph = {f.name: _calls(f.body, set()) for f in unit.functions}

    def reach(start, node, seen):
        for n in graph.get(node, ()):
            if n == start:
                return True
            if n not in seen:
                seen.add(n)
                if reach(start, n, seen):
                    return True
        return False

    for f in unit.functions:
        if reach(f.name, f.name, set()):
            issues.append(TypeIssue(f"recursive call involving {f.name} is not supported", f.pos))


def typecheck(p: A.Program, unit: Optional[A.Unit] = None) -> TypedProgram:
    """Check ``p`` (and its siblings in ``unit``); raise TypeCheckError."""
    unit = unit or A.Unit((p,))
    issues: list[TypeIssue] = []
    names = [f.name for f in unit.functions]
    for n in set(names):
        if names.count(n) > 1:
            issues.append(TypeIssue(f"function {n} defined twice"))
    _check_recursion(unit, issues)
    var_types = {}
    for f in unit.functions:
        c = _Checker(unit, f)
        c.run()
        issues.extend(c.issues)
        if f.name == p.name:
            var_types = c.var_types
    if issues:
        raise TypeCheckError(issues)
    dunit = A.Unit(tuple(_desugar_program(f) for f in unit.functions))
    return TypedProgram(dunit.get(p.name), dunit, var_types)


def typecheck_unit(unit: A.Unit) -> dict[str, TypedProgram]:
    return {f.name: typecheck(f, unit) for f in unit.functions}


# --- desugaring --------------------------------------------------------------

def _desugar(s):
    if isinstance(s, A.Block):
        out = []
        for x in s.stmts:
            d = _desugar(x)
            out.extend(d if isinstance(d, list) else [d])
        return replace(s, stmts=tuple(out))
    if isinstance(s, A.Decl) and isinstance(s.init, A.Call):
        return [replace(s, init=None), A.CallAssign(s.name, s.init.callee, s.init.args, pos=s.pos)]
    if isinstance(s, A.If):
        return replace(s, then=_as_stmt(_desugar(s.then)),
                       orelse=None if s.orelse is None else _as_stmt(_desugar(s.orelse)))
    if isinstance(s, A.While):
        return replace(s, body=_as_stmt(_desugar(s.body)))
    if isinstance(s, A.For):
        body = _desugar(s.body)
        body_stmts = list(body.stmts) if isinstance(body, A.Block) else (body if isinstance(body, list) else [body])
        if s.step is not None:
            body_stmts.append(_as_stmt(_desugar(s.step)))
        cond = s.cond if s.cond is not None else A.BoolLit(True)
        loop = A.While(cond, A.Block(tuple(body_stmts)), pos=s.pos)
        head = []
        if s.init is not None:
            d = _desugar(s.init)
            head.extend(d if isinstance(d, list) else [d])
        return A.Block(tuple(head + [loop]), pos=s.pos)
    return s


def _as_stmt(d):
    return A.Block(tuple(d)) if isinstance(d, list) else d


def _desugar_program(p: A.Program) -> A.Program:
    return replace(p, body=_desugar(p.body))


def desugar(tp: TypedProgram) -> TypedProgram:
    """Rewrite ``for`` loops to ``while``; idempotent."""
    dunit = A.Unit(tuple(_desugar_program(f) for f in tp.unit.functions))
    return TypedProgram(dunit.get(tp.program.name), dunit, tp.var_types)
