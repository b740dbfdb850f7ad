"""Depth-first symbolic execution of one function against its contract."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Union

from .lang import ast as A
from .lang.typecheck import TypedProgram
from .solver import INT_MAX, INT_MIN, SearchConfig, Store
from .solver import ResourceExceeded as SolverBudget
from .translate import InstanceParams, SsaEnv, Translator, negate_ensures

log = logging.getLogger(__name__)


# --- verdicts -------------------------------------------------------------------

@dataclass(frozen=True)
class TraceEntry:
    """One line of a counterexample: an SSA variable (or array slot)."""

    name: str
    lo: int
    hi: int
    value: Optional[int]                      # None when the witness leaves it open
    span: Optional[tuple] = None              # (lo2, hi2) for open entries
    slot: Optional[int] = None


@dataclass(frozen=True)
class Counterexample:
    entries: tuple
    inputs: dict
    case: int
    kind: str                  # "postcondition", "index" or "precondition"
    result: Optional[int] = None
    decisions: tuple = ()
    detail: str = ""
    nodes: int = 0

    def trace(self) -> str:
        from .trace import format_trace
        return format_trace(self)


@dataclass(frozen=True)
class Verified:
    paths: int
    nodes: int
    max_iterations: int = 0


@dataclass(frozen=True)
class ResourceExceeded:
    which: str
    paths: int = 0
    nodes: int = 0


Verdict = Union[Verified, Counterexample, ResourceExceeded]


# --- path state -----------------------------------------------------------------

@dataclass(frozen=True)
class _Loop:
    node: A.While
    count: int


@dataclass(frozen=True)
class PathState:
    env: SsaEnv
    cont: Optional[tuple]            # linked list (item, rest)
    decisions: tuple = ()            # ((line, col), taken) per open conditional
    iterations: int = 0              # deepest loop iteration count on this path


def _cons(items, rest):
    for it in reversed(items):
        rest = (it, rest)
    return rest


class _Stop(Exception):
    def __init__(self, verdict):
        self.verdict = verdict


def _writes(stmt, name: str) -> bool:
    if isinstance(stmt, A.ArrayAssign):
        return stmt.name == name
    if isinstance(stmt, A.Block):
        return any(_writes(s, name) for s in stmt.stmts)
    if isinstance(stmt, A.If):
        return _writes(stmt.then, name) or (stmt.orelse is not None and _writes(stmt.orelse, name))
    if isinstance(stmt, (A.While, A.For)):
        return _writes(stmt.body, name)
    return False


def _index_sites(e, out: list) -> list:
    """Array accesses of ``e`` in evaluation order (inner ones first)."""
    if isinstance(e, A.ArrayRead):
        _index_sites(e.index, out)
        out.append((e.name, e.index))
    elif isinstance(e, A.Unary):
        _index_sites(e.operand, out)
    elif isinstance(e, A.Binary):
        _index_sites(e.left, out)
        _index_sites(e.right, out)
    return out


class Verifier:
    def __init__(self, tp: TypedProgram, inst: Optional[InstanceParams] = None,
                 search: Optional[SearchConfig] = None):
        self.tp = tp
        self.prog = tp.program
        self.inst = inst or InstanceParams()
        self.search = search or SearchConfig()
        self.store = Store()
        self.tr = Translator(self.store, self.inst, tp.var_types)
        self.max_unwind = self.inst.max_unwind or self.inst.default_unwind()
        self.paths = 0
        self.nodes = 0
        self.max_iterations = 0
        self.budget_hit: Optional[str] = None
        self.deadline = None
        self.inputs: list = []          # (param, var or slots)
        self.input_vars: list = []

    # -- setup

    def _make_inputs(self) -> SsaEnv:
        env = SsaEnv()
        tr = self.tr
        for p in self.prog.params:
            if p.type == A.INT_ARRAY:
                n = tr.length(p.name)
                lo, hi = self.inst.bounds.get(p.name, (INT_MIN, INT_MAX))
                slots = tuple(self.store.new_var(lo, hi, name=f"{p.name}_0[{j}]") for j in range(n))
                tr.record(f"{p.name}_0", slots)
                env = env.with_array(p.name, 0, slots)
                self.inputs.append((p.name, slots))
                self.input_vars.extend(slots)
            else:
                lo, hi = (0, 1) if p.type == A.BOOL else (INT_MIN, INT_MAX)
                lo, hi = self.inst.bounds.get(p.name, (lo, hi))
                v = tr.fresh(p.name, 0, lo, hi)
                env = env.with_scalar(p.name, 0, v)
                self.inputs.append((p.name, v))
                self.input_vars.append(v)
        return env

    # -- budgets

    def _tick(self) -> None:
        self.nodes += 1
        if self.inst.max_nodes is not None and self.nodes > self.inst.max_nodes:
            raise SolverBudget("nodes")
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SolverBudget("time")

    def _solve(self):
        cfg = SearchConfig(self.search.var_order, None, None)
        if self.inst.max_nodes is not None:
            cfg.max_nodes = max(0, self.inst.max_nodes - self.nodes)
        if self.deadline is not None:
            cfg.time_limit = max(0.0, self.deadline - time.monotonic())
        before = self.store.stats["nodes"]
        try:
            return self.store.solve(self._order(), cfg)
        finally:
            self.nodes += self.store.stats["nodes"] - before

    def _order(self) -> list:
        """Decision booleans first (they split disjunctions), then inputs,
        then the remaining variables in creation order, and last the booleans
        channelling symbolic array writes, which mostly follow by propagation
        once everything else is fixed."""
        s = self.store
        inputs = set(int(v) for v in self.input_vars)
        flags, rest, channel = [], [], []
        for v in range(s.nvars):
            if v in inputs:
                continue
            if ("channel", v) in s.memo:
                channel.append(v)
            elif s.lo[v] == 0 and s.hi[v] == 1:
                flags.append(v)
            else:
                rest.append(v)
        return flags + list(self.input_vars) + rest + channel

    # -- entry point

    def run(self) -> Verdict:
        if self.inst.time_limit_ms is not None:
            self.deadline = time.monotonic() + self.inst.time_limit_ms / 1000.0
        try:
            env = self._make_inputs()
            self.pre_env = env
            if not self.tr.assume(env, self.prog.contract.requires):
                log.info("%s: precondition unsatisfiable", self.prog.name)
                return Verified(0, self.nodes)
            self._explore(PathState(env, (self.prog.body, None)))
        except _Stop as stop:
            return stop.verdict
        except SolverBudget as e:
            return ResourceExceeded(e.which, self.paths, self.nodes)
        if self.budget_hit:
            return ResourceExceeded(self.budget_hit, self.paths, self.nodes)
        return Verified(self.paths, self.nodes, self.max_iterations)

    # -- exploration

    def _explore(self, start: PathState) -> None:
        store = self.store
        pending: list = []
        cur: Optional[PathState] = start
        while True:
            while cur is not None:
                cur = self._step(cur, pending)
            if not pending:
                return
            mark, alt, b = pending.pop()
            store.pop(mark)
            self._tick()
            cur = alt if self.tr.set_false(b) else None

    def _branch(self, st: PathState, b, cond, then_items, else_items, pending, then_iters=None):
        """Follow ``then`` when ``b`` holds and ``else`` otherwise."""
        s = self.store
        rest = st.cont[1]
        pos = getattr(cond, "pos", None)
        then_iters = st.iterations if then_iters is None else then_iters
        if s.lo[b] == s.hi[b]:
            taken = bool(s.lo[b])
            return PathState(st.env, _cons(then_items if taken else else_items, rest),
                             st.decisions + ((pos, taken),), then_iters if taken else st.iterations)
        self._tick()
        alt = PathState(st.env, _cons(else_items, rest), st.decisions + ((pos, False),), st.iterations)
        mark = s.push()
        pending.append((mark, alt, b))
        if not self.tr.set_true(b):
            return None
        return PathState(st.env, _cons(then_items, rest), st.decisions + ((pos, True),), then_iters)

    def _step(self, st: PathState, pending) -> Optional[PathState]:
        if self.store.failed:
            return None
        if st.cont is None:
            self._complete(st, None)
            return None
        item, rest = st.cont
        env, tr = st.env, self.tr
        if isinstance(item, A.Block):
            return PathState(env, _cons(item.stmts, rest), st.decisions, st.iterations)
        if isinstance(item, A.If):
            self._check_indices(st, _index_sites(item.cond, []))
            b = tr.boolean(env, item.cond)
            else_items = [item.orelse] if item.orelse is not None else []
            return self._branch(st, b, item.cond, [item.then], else_items, pending)
        if isinstance(item, A.While):
            return PathState(env, (_Loop(item, 0), rest), st.decisions, st.iterations)
        if isinstance(item, _Loop):
            node = item.node
            self._check_indices(st, _index_sites(node.cond, []))
            b = tr.boolean(env, node.cond)
            s = self.store
            if item.count >= self.max_unwind and not s.hi[b] == 0:
                # budget spent while the loop may go on: cut that continuation
                if s.lo[b] == 1 or self._satisfiable_with(b):
                    self.budget_hit = "unwind"
                if not tr.set_false(b):
                    return None
                return PathState(env, rest, st.decisions + ((node.cond.pos, False),), st.iterations)
            count = item.count + 1
            return self._branch(st, b, node.cond, [node.body, _Loop(node, count)], [], pending,
                                then_iters=max(st.iterations, count))
        if isinstance(item, A.Return):
            self._complete(st, item.value)
            return None
        sites = []
        if isinstance(item, (A.Assign, A.Decl)):
            if getattr(item, "value", None) is not None:
                _index_sites(item.value, sites)
            if isinstance(item, A.Decl) and item.init is not None:
                _index_sites(item.init, sites)
        elif isinstance(item, A.ArrayAssign):
            _index_sites(item.index, sites)
            _index_sites(item.value, sites)
            sites.append((item.name, item.index))
        elif isinstance(item, A.CallAssign):
            for a in item.args:
                _index_sites(a, sites)
        self._check_indices(st, sites)
        if self.store.failed:
            return None
        if isinstance(item, A.Decl):
            env = tr.declare(env, item.name, item.type, item.init)
        elif isinstance(item, A.Assign):
            env = tr.assign(env, item.name, item.value)
        elif isinstance(item, A.ArrayAssign):
            env = tr.assign_array(env, item.name, item.index, item.value)
        elif isinstance(item, A.CallAssign):
            env = self._call(st, item)
        else:
            raise TypeError(f"unexpected statement {type(item).__name__}")
        if self.store.failed:
            return None
        return PathState(env, rest, st.decisions, st.iterations)

    # -- checks at statements

    def _satisfiable_with(self, b) -> bool:
        s = self.store
        mark = s.push()
        try:
            return self.tr.set_true(b) and self._solve() is not None
        finally:
            s.pop(mark)

    def _check_indices(self, st: PathState, sites) -> None:
        """Report an index that can be out of bounds here; otherwise
        constrain every index to its array's range."""
        tr, s = self.tr, self.store
        for name, index in sites:
            if s.failed:
                return
            n = len(st.env.array(name))
            a = tr.lin(st.env, index)
            if not a[0]:
                if 0 <= a[1] < n:
                    continue
                if self._solve() is not None:
                    raise _Stop(self._counterexample(st, -1, "index", None,
                                                     f"{name}[{a[1]}] with length {n}"))
                tr.set_false(s.const(1))
                return
            i = tr.var_of(a)
            if s.lo[i] >= 0 and s.hi[i] < n:
                continue
            inside = tr.AND([tr.le(({int(i): -1}, 0)), tr.le(({int(i): 1}, -(n - 1)))])
            mark = s.push()
            try:
                if tr.set_false(inside) and self._solve() is not None:
                    raise _Stop(self._counterexample(st, -1, "index", None,
                                                     f"index of {name} may leave [0, {n - 1}]"))
            finally:
                if s.depth and s._marks[-1] is mark:
                    s.pop(mark)
            tr.set_true(tr.AND([tr.le(({int(i): -1}, 0)), tr.le(({int(i): 1}, -(n - 1)))]))

    # -- calls

    def _call(self, st: PathState, stmt: A.CallAssign) -> SsaEnv:
        tr, s = self.tr, self.store
        callee = self.tp.callee(stmt.callee)
        env = st.env
        cenv = SsaEnv()
        post_arrays = {}
        for formal, arg in zip(callee.params, stmt.args):
            if formal.type == A.INT_ARRAY:
                slots = env.array(arg.name)
                cenv = cenv.with_array(formal.name, 0, slots)
                if _writes(callee.body, formal.name):
                    version = env.next_version(arg.name)
                    fresh = tuple(s.new_var(name=f"{arg.name}_{version}[{j}]") for j in range(len(slots)))
                    tr.record(f"{arg.name}_{version}", fresh)
                    env = env.with_array(arg.name, version, fresh)
                    post_arrays[formal.name] = fresh
            elif formal.type == A.BOOL:
                cenv = cenv.with_scalar(formal.name, 0, tr.boolean(env, arg))
            else:
                cenv = cenv.with_scalar(formal.name, 0, tr.expr(env, arg))
        pre = callee.contract.requires
        mark = s.push()
        try:
            if tr.assume_not(cenv, pre) and self._solve() is not None:
                raise _Stop(self._counterexample(st, -1, "precondition", None,
                                                 f"call to {callee.name} may violate its precondition"))
        finally:
            if s.depth and s._marks[-1] is mark:
                s.pop(mark)
        if not tr.assume(cenv, pre):
            return env
        penv = cenv
        for formal, fresh in post_arrays.items():
            penv = penv.with_array(formal, 1, fresh)
        version = env.next_version(stmt.name)
        typ = self.tp.var_types.get(stmt.name, A.INT)
        x = tr.fresh(stmt.name, version, *((0, 1) if typ == A.BOOL else (INT_MIN, INT_MAX)))
        tr.assume(penv, callee.contract.ensures, result=x)
        return env.with_scalar(stmt.name, version, x)

    # -- complete paths

    def _complete(self, st: PathState, value) -> None:
        tr, s = self.tr, self.store
        result = None
        if value is not None:
            sites = _index_sites(value, [])
            self._check_indices(st, sites)
            if s.failed:
                return
            if self.prog.result_type == A.BOOL:
                result = tr.fresh("JMLResult", 0, 0, 1)
                tr.post(_equal(result, tr.boolean(st.env, value)))
            else:
                result = tr.fresh("JMLResult", 0)
                tr.bind(result, tr.lin(st.env, value))
            if s.failed:
                return
        if self._solve() is None:
            return
        self.paths += 1
        self.max_iterations = max(self.max_iterations, st.iterations)
        cases = negate_ensures(tr, self._ensures_env(st.env), self.prog.contract.ensures, result)
        for case in cases:
            mark = s.push()
            try:
                if tr.assume_not(case.env, case.formula, result) and self._solve() is not None:
                    raise _Stop(self._counterexample(st, case.index, "postcondition", result))
            finally:
                if s.depth and s._marks[-1] is mark:
                    s.pop(mark)

    def _ensures_env(self, env: SsaEnv) -> SsaEnv:
        """Final arrays, but scalar parameters as they were on entry."""
        for p in self.prog.params:
            if p.type != A.INT_ARRAY:
                v, var = self.pre_env.scalars[p.name]
                env = env.with_scalar(p.name, v, var)
        return env

    def _counterexample(self, st: PathState, case: int, kind: str, result, detail: str = "") -> Counterexample:
        s = self.store
        sol = self._solve()
        inputs = {}
        for name, what in self.inputs:
            inputs[name] = [sol[v] for v in what] if isinstance(what, tuple) else sol[what]
        # fix the inputs only and let propagation show what they determine
        mark = s.push()
        try:
            s.try_update(lambda: [s.assign(v, sol[v]) for v in self.input_vars])
            entries = []
            for name, what in self.tr.entries:
                if isinstance(what, tuple):
                    for j, v in enumerate(what):
                        entries.append(self._entry(name, v, sol, j))
                else:
                    entries.append(self._entry(name, what, sol))
        finally:
            s.pop(mark)
        res = None if result is None else sol[result]
        return Counterexample(tuple(entries), inputs, case, kind, res, st.decisions, detail, self.nodes)

    def _entry(self, name, v, sol, slot=None) -> TraceEntry:
        s = self.store
        lo, hi = s.initial[v]
        if s.failed or s.lo[v] == s.hi[v]:
            return TraceEntry(name, lo, hi, sol[v], None, slot)
        return TraceEntry(name, lo, hi, None, (s.lo[v], s.hi[v]), slot)


def _equal(x, y):
    from .solver import Equal
    return Equal(x, y)


def verify(tp: TypedProgram, inst: Optional[InstanceParams] = None,
           search: Optional[SearchConfig] = None) -> Verdict:
    """Verify ``tp`` against its contract on one instance."""
    return Verifier(tp, inst, search).run()
