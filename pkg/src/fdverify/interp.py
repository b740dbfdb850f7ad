"""Concrete interpreter for typed programs and their contracts.

Used as the brute-force oracle: it runs one input to completion and reports
the result, the SSA-style assignment trace and the branch decisions in the
same ``((line, col), taken)`` form the symbolic engine records.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lang import ast as A
from .lang.typecheck import TypedProgram
from .solver import INT_MAX, INT_MIN, tdiv


class InterpError(Exception):
    """Base class of everything that stops a concrete run."""


class OutOfBounds(InterpError):
    def __init__(self, name, index, length, pos=None):
        super().__init__(f"{name}[{index}] out of bounds (length {length})")
        self.name, self.index, self.length, self.pos = name, index, length, pos


class PreconditionViolated(InterpError):
    def __init__(self, callee, pos=None):
        super().__init__(f"precondition of {callee} violated")
        self.callee, self.pos = callee, pos


class StepBudgetExceeded(InterpError):
    pass


class Pruned(InterpError):
    """Division by zero or a stored value outside the machine range.  The
    symbolic engine treats both as infeasible, so the oracle skips them."""


@dataclass
class Run:
    result: object
    arrays: dict                     # final contents of every array parameter
    assignments: list = field(default_factory=list)   # (ssa name, value)
    decisions: list = field(default_factory=list)     # ((line, col), taken)
    steps: int = 0


class _Return(Exception):
    def __init__(self, value):
        self.value = value


def _check_range(v):
    if isinstance(v, bool):
        return v
    if not INT_MIN <= v <= INT_MAX:
        raise Pruned(f"value {v} outside [{INT_MIN}, {INT_MAX}]")
    return v


class _Frame:
    def __init__(self, interp, prog: A.Program):
        self.interp = interp
        self.prog = prog
        self.scalars: dict = {}
        self.arrays: dict = {}
        self.version: dict = {}

    def write(self, name, value, fresh=False):
        ver = 0 if fresh else self.version.get(name, -1) + 1
        self.version[name] = ver
        self.scalars[name] = value
        self.interp.log(f"{name}_{ver}", value)

    # -- expressions (eager: every operand is evaluated)

    def ev(self, e, result=None):
        if isinstance(e, A.IntLit):
            return e.value
        if isinstance(e, A.BoolLit):
            return e.value
        if isinstance(e, A.VarRef):
            return self.scalars[e.name]
        if isinstance(e, A.ResultRef):
            return result
        if isinstance(e, A.LengthOf):
            return len(self.arrays[e.name])
        if isinstance(e, A.ArrayRead):
            i = self.ev(e.index, result)
            arr = self.arrays[e.name]
            if not 0 <= i < len(arr):
                raise OutOfBounds(e.name, i, len(arr), e.pos)
            return arr[i]
        if isinstance(e, A.Unary):
            v = self.ev(e.operand, result)
            return (not v) if e.op == "!" else -v
        if isinstance(e, A.Binary):
            a = self.ev(e.left, result)
            b = self.ev(e.right, result)
            return _binop(e.op, a, b)
        if isinstance(e, A.Call):
            return self.interp.call(self, e.callee, e.args, e.pos)
        raise TypeError(f"unexpected expression {type(e).__name__}")

    # -- statements

    def exec(self, s):
        it = self.interp
        it.tick()
        if isinstance(s, A.Block):
            for x in s.stmts:
                self.exec(x)
        elif isinstance(s, A.Decl):
            if s.type == A.INT_ARRAY:
                raise TypeError("local arrays are not supported")
            if s.init is None:
                self.write(s.name, False if s.type == A.BOOL else 0, fresh=True)
            else:
                self.write(s.name, _check_range(self.ev(s.init)), fresh=True)
        elif isinstance(s, A.Assign):
            self.write(s.name, _check_range(self.ev(s.value)))
        elif isinstance(s, A.CallAssign):
            self.write(s.name, _check_range(it.call(self, s.callee, s.args, s.pos)))
        elif isinstance(s, A.ArrayAssign):
            i = self.ev(s.index)
            v = _check_range(self.ev(s.value))
            arr = self.arrays[s.name]
            if not 0 <= i < len(arr):
                raise OutOfBounds(s.name, i, len(arr), s.pos)
            arr[i] = v
            ver = self.version.get(s.name, 0) + 1
            self.version[s.name] = ver
            it.log(f"{s.name}_{ver}[{i}]", v)
        elif isinstance(s, A.If):
            taken = bool(self.ev(s.cond))
            it.decide(s.cond.pos, taken)
            if taken:
                self.exec(s.then)
            elif s.orelse is not None:
                self.exec(s.orelse)
        elif isinstance(s, A.While):
            while True:
                taken = bool(self.ev(s.cond))
                it.decide(s.cond.pos, taken)
                if not taken:
                    break
                self.exec(s.body)
                it.tick()
        elif isinstance(s, A.Return):
            raise _Return(None if s.value is None else _check_range(self.ev(s.value)))
        else:
            raise TypeError(f"unexpected statement {type(s).__name__}")


def _binop(op, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise Pruned("division by zero")
        return tdiv(a, b)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "&&":
        return bool(a) and bool(b)
    if op == "||":
        return bool(a) or bool(b)
    raise ValueError(f"unknown operator {op}")


class Interpreter:
    def __init__(self, tp: TypedProgram, max_steps: int = 1_000_000):
        self.tp = tp
        self.max_steps = max_steps
        self.steps = 0
        self.trace: list = []
        self.decisions: list = []
        self.depth = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise StepBudgetExceeded(f"more than {self.max_steps} steps")

    def log(self, name, value):
        if self.depth == 0:
            self.trace.append((name, value))

    def decide(self, pos, taken):
        if self.depth == 0:
            self.decisions.append((pos, taken))

    def call(self, caller: _Frame, callee: str, args, pos):
        prog = self.tp.callee(callee)
        frame = _Frame(self, prog)
        for p, a in zip(prog.params, args):
            if p.type == A.INT_ARRAY:
                frame.arrays[p.name] = caller.arrays[a.name]   # by reference
            else:
                frame.scalars[p.name] = caller.ev(a)
        if not holds(prog.contract.requires, frame.scalars, frame.arrays):
            raise PreconditionViolated(callee, pos)
        self.depth += 1
        try:
            frame.exec(prog.body)
            value = None
        except _Return as r:
            value = r.value
        finally:
            self.depth -= 1
        return value

    def run(self, inputs: dict) -> Run:
        prog = self.tp.program
        frame = _Frame(self, prog)
        for p in prog.params:
            v = inputs[p.name]
            if p.type == A.INT_ARRAY:
                frame.arrays[p.name] = list(v)
                frame.version[p.name] = 0
            else:
                frame.scalars[p.name] = v
                frame.version[p.name] = 0
        try:
            frame.exec(prog.body)
            value = None
        except _Return as r:
            value = r.value
        return Run(value, frame.arrays, self.trace, self.decisions, self.steps)


def concrete_interpret(tp: TypedProgram, inputs: dict, max_steps: int = 1_000_000) -> Run:
    """Run ``tp`` on concrete ``inputs`` (name -> int, bool or list of ints)."""
    return Interpreter(tp, max_steps).run(inputs)


# --- contracts -------------------------------------------------------------------

class _ContractFrame(_Frame):
    def __init__(self, scalars, arrays):
        self.scalars = scalars
        self.arrays = arrays


def holds(f, scalars: dict, arrays: dict, result=None) -> bool:
    """Evaluate a contract formula; ``&&``, ``||`` and ``==>`` short-circuit.

    Raises OutOfBounds if a read that is actually evaluated falls outside
    its array."""
    fr = _ContractFrame(scalars, arrays)

    def ev(e):
        if isinstance(e, A.Binary) and e.op in ("&&", "||"):
            a = bool(ev(e.left))
            if (e.op == "&&") != a:
                return a
            return bool(ev(e.right))
        if isinstance(e, A.Unary) and e.op == "!":
            return not ev(e.operand)
        if isinstance(e, A.Binary) and e.op in A.CMP_OPS + A.EQ_OPS:
            return _binop(e.op, ev(e.left), ev(e.right))
        return fr.ev(e, result)

    def go(f):
        if isinstance(f, A.Atom):
            return bool(ev(f.expr))
        if isinstance(f, A.Not):
            return not go(f.arg)
        if isinstance(f, A.And):
            return all(go(a) for a in f.args)
        if isinstance(f, A.Or):
            return any(go(a) for a in f.args)
        if isinstance(f, A.Implies):
            return (not go(f.lhs)) or go(f.rhs)
        if isinstance(f, A.ForAll):
            lo, hi = ev(f.low), ev(f.high)
            saved = fr.scalars.get(f.var, _MISSING)
            try:
                for v in range(lo, hi):
                    fr.scalars[f.var] = v
                    if not go(f.body):
                        return False
                return True
            finally:
                if saved is _MISSING:
                    fr.scalars.pop(f.var, None)
                else:
                    fr.scalars[f.var] = saved
        if isinstance(f, A.AllDifferent):
            arr = fr.arrays[f.array]
            return len(set(arr)) == len(arr)
        raise TypeError(f"unexpected formula {type(f).__name__}")

    return go(f)


_MISSING = object()
