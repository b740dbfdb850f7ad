"""Path translation: expressions, assignments and contracts to store constraints.

Integer expressions are first turned into linear forms ``({var: coef}, const)``
and only materialised into a variable when some constraint needs one.
Comparisons are put in a canonical ``sum <= k`` / ``sum == k`` shape and
memoised in the store, so the same test met twice along a path (or in a
condition and again in the postcondition) maps to one reified variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Optional

from .lang import ast as A
from .solver import (
    INT_MAX,
    INT_MIN,
    AllDifferent,
    BoolAnd,
    BoolNot,
    BoolOr,
    Div,
    Element,
    Equal,
    Linear,
    Mult,
    OneOf,
    Reified,
    Store,
    tdiv,
)

QUANTIFIER_CAP = 100_000


class TranslationError(Exception):
    pass


class UnboundIdentifier(TranslationError):
    pass


class NonConstantQuantifierBound(TranslationError):
    pass


class MissingLength(TranslationError):
    def __init__(self, name: str):
        super().__init__(f"no length given for array parameter {name}")
        self.name = name


@dataclass
class InstanceParams:
    """Per-run instance: array lengths, input domains and budgets.

    A bound on an array parameter applies to every one of its slots."""

    lengths: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    max_unwind: Optional[int] = None
    max_nodes: Optional[int] = None
    time_limit_ms: Optional[int] = None

    def __post_init__(self):
        for k, n in self.lengths.items():
            if n < 0:
                raise ValueError(f"negative length for {k}")
        for k, (lo, hi) in self.bounds.items():
            if lo > hi:
                raise ValueError(f"empty bound for {k}")
        if self.max_unwind is not None and self.max_unwind < 1:
            raise ValueError("max_unwind must be at least 1")

    def default_unwind(self) -> int:
        span = max(self.lengths.values(), default=0)
        for lo, hi in self.bounds.values():
            span = max(span, hi - lo + 1)
        return 2 * span + 8


@dataclass(frozen=True)
class SsaEnv:
    """Current SSA version of every scalar and array along one path."""

    scalars: dict = field(default_factory=dict)   # name -> (version, var)
    arrays: dict = field(default_factory=dict)    # name -> (version, tuple of vars)
    last: dict = field(default_factory=dict)      # name -> highest version used

    def with_scalar(self, name, version, var) -> "SsaEnv":
        s = dict(self.scalars)
        s[name] = (version, var)
        return SsaEnv(s, self.arrays, self._bump(name, version))

    def with_array(self, name, version, slots) -> "SsaEnv":
        a = dict(self.arrays)
        a[name] = (version, tuple(slots))
        return SsaEnv(self.scalars, a, self._bump(name, version))

    def _bump(self, name, version):
        if self.last.get(name, -1) >= version:
            return self.last
        d = dict(self.last)
        d[name] = version
        return d

    def next_version(self, name) -> int:
        return self.last.get(name, -1) + 1

    def scalar(self, name):
        try:
            return self.scalars[name][1]
        except KeyError:
            raise UnboundIdentifier(name) from None

    def array(self, name) -> tuple:
        try:
            return self.arrays[name][1]
        except KeyError:
            raise UnboundIdentifier(name) from None


Lin = tuple  # (dict var -> coef, const)


def _lin_add(a: Lin, b: Lin, sign: int = 1) -> Lin:
    terms = dict(a[0])
    for x, c in b[0].items():
        n = terms.get(x, 0) + sign * c
        if n:
            terms[x] = n
        else:
            terms.pop(x, None)
    return terms, a[1] + sign * b[1]


def _lin_scale(a: Lin, k: int) -> Lin:
    if k == 0:
        return {}, 0
    return {x: c * k for x, c in a[0].items()}, a[1] * k


class Translator:
    """Builds constraints in ``store`` for one verification run."""

    def __init__(self, store: Store, inst: InstanceParams, var_types: Optional[dict] = None):
        self.store = store
        self.inst = inst
        self.var_types = var_types or {}
        self.entries: list = []   # (display name, var or slot tuple) in creation order

    # -- bookkeeping

    def record(self, name: str, what) -> None:
        self.entries.append((name, what))
        self.store.trail_undo(self.entries.pop)

    def fresh(self, ident: str, version: int, lo=INT_MIN, hi=INT_MAX):
        v = self.store.new_var(lo, hi, name=f"{ident}_{version}")
        self.record(f"{ident}_{version}", v)
        return v

    def length(self, name: str) -> int:
        try:
            return self.inst.lengths[name]
        except KeyError:
            raise MissingLength(name) from None

    def post(self, c) -> bool:
        return self.store.post(c)

    def set_true(self, b) -> bool:
        s = self.store
        return s.try_update(lambda: s.assign(b, 1))

    def set_false(self, b) -> bool:
        s = self.store
        return s.try_update(lambda: s.assign(b, 0))

    def _memo(self, key, make):
        s = self.store
        v = s.memo.get(key)
        if v is None:
            v = make()
            s.memo_set(key, v)
        return v

    # -- integer expressions

    def lin(self, env: SsaEnv, e, result=None, guarded: bool = False) -> Lin:
        if isinstance(e, A.IntLit):
            return {}, e.value
        if isinstance(e, A.BoolLit):
            return {}, int(e.value)
        if isinstance(e, A.VarRef):
            return self._var_lin(env.scalar(e.name))
        if isinstance(e, A.ResultRef):
            if result is None:
                raise UnboundIdentifier("\\result")
            return self._var_lin(result)
        if isinstance(e, A.LengthOf):
            if e.name not in env.arrays:
                raise UnboundIdentifier(e.name)
            return {}, len(env.array(e.name))
        if isinstance(e, A.ArrayRead):
            return self._var_lin(self.read(env, e, result, guarded))
        if isinstance(e, A.Unary):
            if e.op == "-":
                return _lin_scale(self.lin(env, e.operand, result, guarded), -1)
            return self._var_lin(self.boolean(env, e, result, guarded))
        if isinstance(e, A.Binary):
            if e.op in ("+", "-"):
                return _lin_add(self.lin(env, e.left, result, guarded),
                                self.lin(env, e.right, result, guarded),
                                1 if e.op == "+" else -1)
            if e.op == "*":
                a = self.lin(env, e.left, result, guarded)
                b = self.lin(env, e.right, result, guarded)
                if not a[0]:
                    return _lin_scale(b, a[1])
                if not b[0]:
                    return _lin_scale(a, b[1])
                x, y = self.var_of(a), self.var_of(b)
                key = ("mul",) + tuple(sorted((x, y)))
                return self._var_lin(self._memo(key, lambda: self._new_op(Mult, x, y)))
            if e.op == "/":
                a = self.lin(env, e.left, result, guarded)
                b = self.lin(env, e.right, result, guarded)
                if not a[0] and not b[0] and b[1] != 0:
                    return {}, tdiv(a[1], b[1])
                x, y = self.var_of(a), self.var_of(b)
                return self._var_lin(self._memo(("div", x, y), lambda: self._new_op(Div, x, y)))
            return self._var_lin(self.boolean(env, e, result, guarded))
        raise TranslationError(f"cannot translate {type(e).__name__}")

    def _var_lin(self, v) -> Lin:
        s = self.store
        if s.lo[v] == s.hi[v]:
            return {}, s.lo[v]
        return {int(v): 1}, 0

    def _new_op(self, cls, x, y):
        z = self.store.new_var()
        self.post(cls(x, y, z))
        return z

    def var_of(self, a: Lin):
        """Materialise a linear form as a single variable."""
        terms, k = a
        s = self.store
        if not terms:
            if INT_MIN <= k <= INT_MAX:
                return s.const(k)
            z = s.new_var()
            self.set_false(s.const(1))   # out-of-range constant: the path dies
            return z
        if k == 0 and len(terms) == 1:
            (x, c), = terms.items()
            if c == 1:
                return s.var(x)
        key = ("lin", tuple(sorted(terms.items())), k)

        def make():
            z = s.new_var()
            self.post(Linear([(c, x) for x, c in terms.items()] + [(-1, z)], "==", -k))
            return z
        return self._memo(key, make)

    def expr(self, env: SsaEnv, e, result=None):
        """Variable holding the value of ``e``."""
        return self.var_of(self.lin(env, e, result))

    # -- array reads

    def read(self, env: SsaEnv, e: A.ArrayRead, result=None, guarded: bool = False):
        """Slot value of ``a[i]``.  In statements the caller has already
        established 0 <= i < length; in contracts (``guarded``) an out-of-range
        index yields an unconstrained value instead of killing the path."""
        slots = env.array(e.name)
        idx = self.lin(env, e.index, result, guarded)
        n = len(slots)
        s = self.store
        if not idx[0]:
            c = idx[1]
            if 0 <= c < n:
                return slots[c]
            if guarded:
                return s.new_var()
            self.set_false(s.const(1))
            return s.new_var()
        i = self.var_of(idx)
        if guarded and not (s.lo[i] >= 0 and s.hi[i] < n):
            if n == 0:
                return s.new_var()
            inside = self.AND([self.le(_lin_add(({}, 0), idx, -1)),
                               self.le(_lin_add(idx, ({}, n - 1), -1))])

            def clip():
                j = s.new_var(0, n - 1)
                self.post(BoolOr(s.const(1), [self.NOT(inside), self.eq(_lin_add(({int(j): 1}, 0), idx, -1))]))
                return j
            i = self._memo(("clip", int(i), n), clip)
        key = ("elem", int(i), tuple(int(x) for x in slots))

        def make():
            v = s.new_var()
            self.post(Element(i, slots, v))
            return v
        return self._memo(key, make)

    # -- booleans

    def const_bool(self, truth: bool):
        return self.store.const(1 if truth else 0)

    def le(self, a: Lin):
        """0/1 variable for ``a <= 0``."""
        terms, k = a
        if not terms:
            return self.const_bool(k <= 0)
        g = 0
        for c in terms.values():
            g = gcd(g, abs(c))
        bound = (-k) // g   # floor division keeps the integer meaning
        items = tuple(sorted((x, c // g) for x, c in terms.items()))
        return self._reif("<=", items, bound)

    def eq(self, a: Lin):
        """0/1 variable for ``a == 0``."""
        terms, k = a
        if not terms:
            return self.const_bool(k == 0)
        g = 0
        for c in terms.values():
            g = gcd(g, abs(c))
        if k % g:
            return self.const_bool(False)
        items = sorted((x, c // g) for x, c in terms.items())
        rhs = -k // g
        if items[0][1] < 0:
            items = [(x, -c) for x, c in items]
            rhs = -rhs
        return self._reif("==", tuple(items), rhs)

    def _reif(self, op, items, bound):
        s = self.store

        def make():
            b = s.new_var(0, 1)
            self.post(Reified(b, [(c, x) for x, c in items], op, bound))
            return b
        return self._memo(("rel", op, items, bound), make)

    def NOT(self, b):
        s = self.store
        if s.lo[b] == s.hi[b]:
            return self.const_bool(s.lo[b] == 0)

        def make():
            nb = s.new_var(0, 1)
            self.post(BoolNot(nb, b))
            s.memo_set(("not", int(nb)), b)
            return nb
        return self._memo(("not", int(b)), make)

    def _junction(self, kind, xs):
        s = self.store
        absorbing = 0 if kind == "and" else 1
        live = []
        for x in xs:
            if s.lo[x] == s.hi[x]:
                if s.lo[x] == absorbing:
                    return self.const_bool(bool(absorbing))
                continue
            if int(x) not in live:
                live.append(int(x))
        if not live:
            return self.const_bool(not absorbing)
        if len(live) == 1:
            return s.var(live[0])
        live.sort()

        def make():
            r = s.new_var(0, 1)
            self.post((BoolAnd if kind == "and" else BoolOr)(r, live))
            return r
        return self._memo((kind, tuple(live)), make)

    def AND(self, xs):
        return self._junction("and", xs)

    def OR(self, xs):
        return self._junction("or", xs)

    def compare(self, op: str, a: Lin, b: Lin):
        d = _lin_add(a, b, -1)
        if op == "<=":
            return self.le(d)
        if op == ">":
            return self.NOT(self.le(d))
        if op == ">=":
            return self.le(_lin_scale(d, -1))
        if op == "<":
            return self.NOT(self.le(_lin_scale(d, -1)))
        if op == "==":
            return self.eq(d)
        if op == "!=":
            return self.NOT(self.eq(d))
        raise TranslationError(f"unknown comparison {op}")

    def boolean(self, env: SsaEnv, e, result=None, guarded: bool = False):
        """0/1 variable equivalent to boolean expression ``e``."""
        if isinstance(e, A.BoolLit):
            return self.const_bool(e.value)
        if isinstance(e, A.VarRef):
            return env.scalar(e.name)
        if isinstance(e, A.ResultRef):
            return result
        if isinstance(e, A.Unary) and e.op == "!":
            return self.NOT(self.boolean(env, e.operand, result, guarded))
        if isinstance(e, A.Binary):
            if e.op == "&&":
                return self.AND([self.boolean(env, e.left, result, guarded),
                                 self.boolean(env, e.right, result, guarded)])
            if e.op == "||":
                return self.OR([self.boolean(env, e.left, result, guarded),
                                self.boolean(env, e.right, result, guarded)])
            if e.op in A.CMP_OPS or e.op in A.EQ_OPS:
                return self.compare(e.op, self.lin(env, e.left, result, guarded),
                                    self.lin(env, e.right, result, guarded))
        raise TranslationError(f"not a boolean expression: {type(e).__name__}")

    # -- assignments

    def assign(self, env: SsaEnv, name: str, e) -> SsaEnv:
        """``name = e``: a fresh version equal to ``e`` evaluated in ``env``."""
        if self.var_types.get(name) == A.BOOL:
            value = self.boolean(env, e)
            version = env.next_version(name)
            x = self.fresh(name, version, 0, 1)
            self.post(Equal(x, value))
            return env.with_scalar(name, version, x)
        a = self.lin(env, e)
        version = env.next_version(name)
        x = self.fresh(name, version)
        self.bind(x, a)
        return env.with_scalar(name, version, x)

    def bind(self, x, a: Lin) -> None:
        terms, k = a
        s = self.store
        if not terms:
            s.try_update(lambda: s.assign(x, k))
        elif k == 0 and len(terms) == 1 and next(iter(terms.values())) == 1:
            self.post(Equal(x, next(iter(terms))))
        else:
            self.post(Linear([(c, v) for v, c in terms.items()] + [(-1, x)], "==", -k))

    def declare(self, env: SsaEnv, name: str, typ: str, init=None) -> SsaEnv:
        if init is not None:
            return self.assign(env, name, init)
        version = env.next_version(name)
        x = self.fresh(name, version, *((0, 1) if typ == A.BOOL else (INT_MIN, INT_MAX)))
        self.bind(x, ({}, 0))
        return env.with_scalar(name, version, x)

    def assign_array(self, env: SsaEnv, name: str, index, value) -> SsaEnv:
        """``name[index] = value`` as a new array version."""
        slots = list(env.array(name))
        n = len(slots)
        s = self.store
        idx = self.lin(env, index)
        val = self.expr(env, value)
        version = env.next_version(name)
        if not idx[0]:
            c = idx[1]
            if not 0 <= c < n:
                self.set_false(s.const(1))
                return env
            slots[c] = val
        else:
            i = self.var_of(idx)
            s.try_update(lambda: s.set_bounds(i, 0, n - 1))
            old = list(slots)
            for j in range(n):
                if not s.contains(i, j):
                    continue
                nj = s.new_var(name=f"{name}_{version}[{j}]")
                slots[j] = nj
                hit = self.eq(({int(i): 1}, -j))
                keep = self.eq(({int(nj): 1, int(old[j]): -1}, 0))
                for b in (hit, keep):
                    s.memo_set(("channel", int(b)), True)
                self.post(BoolOr(s.const(1), [hit, keep]))
                self.post(OneOf(nj, [val, old[j]]))
            self.post(Element(i, slots, val))
        self.record(f"{name}_{version}", tuple(slots))
        return env.with_array(name, version, slots)

    # -- contracts

    def quantifier_range(self, env: SsaEnv, f: A.ForAll, result=None):
        """Concrete candidate range for a bounded quantifier plus whether the
        bounds are exact (if not, each instance needs a range guard)."""
        lo = self.lin(env, f.low, result)
        hi = self.lin(env, f.high, result)
        s = self.store
        if not lo[0] and not hi[0]:
            return range(lo[1], hi[1]), True
        lmin = lo[1] if not lo[0] else s.lo[self.var_of(lo)]
        hmax = hi[1] if not hi[0] else s.hi[self.var_of(hi)]
        if hmax - lmin > QUANTIFIER_CAP:
            raise NonConstantQuantifierBound(
                f"bounds of \\forall {f.var} are not constant and span {hmax - lmin} values")
        return range(lmin, hmax), False

    def instance(self, env: SsaEnv, f: A.ForAll, k: int, exact: bool, result=None):
        """Body of ``f`` at ``k``; with inexact bounds, an implication from the range test."""
        benv = env.with_scalar(f.var, -1, self.store.const(k))
        body = f.body
        if not exact:
            guard = A.And((A.Atom(A.Binary("<=", f.low, A.IntLit(k))),
                           A.Atom(A.Binary("<", A.IntLit(k), f.high))))
            body = A.Implies(guard, body)
        return benv, body

    def formula(self, env: SsaEnv, f, result=None):
        """0/1 variable equivalent to contract formula ``f``."""
        if isinstance(f, A.Atom):
            return self.boolean(env, f.expr, result, guarded=True)
        if isinstance(f, A.Not):
            return self.NOT(self.formula(env, f.arg, result))
        if isinstance(f, A.And):
            return self.AND([self.formula(env, g, result) for g in f.args])
        if isinstance(f, A.Or):
            return self.OR([self.formula(env, g, result) for g in f.args])
        if isinstance(f, A.Implies):
            return self.OR([self.NOT(self.formula(env, f.lhs, result)), self.formula(env, f.rhs, result)])
        if isinstance(f, A.ForAll):
            rng, exact = self.quantifier_range(env, f, result)
            parts = []
            for k in rng:
                benv, body = self.instance(env, f, k, exact, result)
                parts.append(self.formula(benv, body, result))
            return self.AND(parts)
        if isinstance(f, A.AllDifferent):
            slots = env.array(f.array)
            # a slot shared by two positions (e.g. one constant) is never distinct
            pairs = [self.const_bool(False) if a == b else
                     self.NOT(self.eq(_lin_add(({int(a): 1}, 0), ({int(b): 1}, 0), -1)))
                     for n, a in enumerate(slots) for b in slots[n + 1:]]
            return self.AND(pairs)
        raise TranslationError(f"unexpected formula {type(f).__name__}")

    def assume(self, env: SsaEnv, f, result=None) -> bool:
        """Post ``f`` as a hard constraint; False when the store becomes inconsistent."""
        if isinstance(f, A.And):
            return all(self.assume(env, g, result) for g in f.args)
        if isinstance(f, A.Not):
            return self.assume_not(env, f.arg, result)
        if isinstance(f, A.ForAll):
            rng, exact = self.quantifier_range(env, f, result)
            for k in rng:
                benv, body = self.instance(env, f, k, exact, result)
                if not self.assume(benv, body, result):
                    return False
            return not self.store.failed
        if isinstance(f, A.AllDifferent):
            slots = env.array(f.array)
            return self.post(AllDifferent(slots)) if len(slots) > 1 else not self.store.failed
        return self.set_true(self.formula(env, f, result))

    def assume_not(self, env: SsaEnv, f, result=None) -> bool:
        """Post the negation of ``f``."""
        if isinstance(f, A.Not):
            return self.assume(env, f.arg, result)
        if isinstance(f, A.Or):
            return all(self.assume_not(env, g, result) for g in f.args)
        if isinstance(f, A.Implies):
            return self.assume(env, f.lhs, result) and self.assume_not(env, f.rhs, result)
        return self.set_false(self.formula(env, f, result))


# --- ensures negation -----------------------------------------------------------

@dataclass(frozen=True)
class Case:
    """One way to violate the postcondition: the negation of ``formula``."""

    index: int
    formula: object
    env: SsaEnv = field(compare=False, default=None)


def negate_ensures(tr: Translator, env: SsaEnv, ensures, result=None) -> list[Case]:
    """Split the negated postcondition over its top-level conjuncts (and over
    the instances of top-level quantifiers).  The union of the cases' solutions
    is exactly the set of solutions violating ``ensures``."""
    out: list[Case] = []

    def walk(f, fenv):
        if isinstance(f, A.And):
            for g in f.args:
                walk(g, fenv)
        elif isinstance(f, A.ForAll):
            rng, exact = tr.quantifier_range(fenv, f, result)
            for k in rng:
                benv, body = tr.instance(fenv, f, k, exact, result)
                walk(body, benv)
        elif f == A.TRUE:
            return
        else:
            out.append(Case(len(out), f, fenv))

    walk(ensures, env)
    return out
