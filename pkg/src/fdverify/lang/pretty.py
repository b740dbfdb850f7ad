"""Source printer.  Output re-parses to an equal AST."""
from __future__ import annotations

from . import ast as A

_INDENT = "  "


def expr(e) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value) if e.value >= 0 else f"(-{-e.value})"
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.VarRef):
        return e.name
    if isinstance(e, A.ResultRef):
        return "\\result"
    if isinstance(e, A.ArrayRead):
        return f"{e.name}[{expr(e.index)}]"
    if isinstance(e, A.LengthOf):
        return f"{e.name}.length"
    if isinstance(e, A.Unary):
        return f"{e.op}({expr(e.operand)})"
    if isinstance(e, A.Binary):
        return f"({expr(e.left)} {e.op} {expr(e.right)})"
    if isinstance(e, A.Call):
        return f"{e.callee}({', '.join(expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def formula(f) -> str:
    if isinstance(f, A.Atom):
        return expr(f.expr)
    if isinstance(f, A.Not):
        return f"!({formula(f.arg)})"
    if isinstance(f, A.And):
        return "(" + " && ".join(formula(g) for g in f.args) + ")"
    if isinstance(f, A.Or):
        return "(" + " || ".join(formula(g) for g in f.args) + ")"
    if isinstance(f, A.Implies):
        return f"({formula(f.lhs)} ==> {formula(f.rhs)})"
    if isinstance(f, A.ForAll):
        rng = f"{expr(f.low)} <= {f.var} && {f.var} < {expr(f.high)}"
        return f"(\\forall int {f.var}; ({rng}); {formula(f.body)})"
    if isinstance(f, A.AllDifferent):
        return f"\\alldifferent {f.array}"
    raise TypeError(f"not a formula: {f!r}")


def _simple(s) -> str:
    if isinstance(s, A.Decl):
        init = "" if s.init is None else f" = {expr(s.init)}"
        return f"{s.type} {s.name}{init}"
    if isinstance(s, A.Assign):
        return f"{s.name} = {expr(s.value)}"
    if isinstance(s, A.ArrayAssign):
        return f"{s.name}[{expr(s.index)}] = {expr(s.value)}"
    if isinstance(s, A.CallAssign):
        return f"{s.name} = {s.callee}({', '.join(expr(a) for a in s.args)})"
    raise TypeError(f"not a simple statement: {s!r}")


def stmt(s, depth: int = 0) -> list[str]:
    pad = _INDENT * depth
    if isinstance(s, A.Block):
        lines = [pad + "{"]
        for x in s.stmts:
            lines.extend(stmt(x, depth + 1))
        return lines + [pad + "}"]
    if isinstance(s, A.If):
        lines = [f"{pad}if ({expr(s.cond)})"] + stmt(s.then, depth + 1)
        if s.orelse is not None:
            lines += [pad + "else"] + stmt(s.orelse, depth + 1)
        return lines
    if isinstance(s, A.While):
        return [f"{pad}while ({expr(s.cond)})"] + stmt(s.body, depth + 1)
    if isinstance(s, A.For):
        init = "" if s.init is None else _simple(s.init)
        cond = "" if s.cond is None else expr(s.cond)
        step = "" if s.step is None else _simple(s.step)
        return [f"{pad}for ({init}; {cond}; {step})"] + stmt(s.body, depth + 1)
    if isinstance(s, A.Return):
        return [pad + ("return;" if s.value is None else f"return {expr(s.value)};")]
    return [pad + _simple(s) + ";"]


def program(p: A.Program) -> str:
    lines = []
    clauses = [("requires", p.contract.requires), ("ensures", p.contract.ensures)]
    clauses = [(k, f) for k, f in clauses if f != A.TRUE]
    if clauses:
        lines.append("/*@")
        for k, f in clauses:
            lines.append(f"  @ {k} {formula(f)};")
        lines.append("  @*/")
    params = ", ".join(f"{q.type} {q.name}" for q in p.params)
    lines.append(f"{p.result_type} {p.name}({params})")
    lines.extend(stmt(p.body))
    return "\n".join(lines)


def unit(u: A.Unit) -> str:
    return "\n\n".join(program(p) for p in u.functions) + "\n"
