"""Constraint propagators.

Each constraint exposes ``scope()`` (variables it mentions), ``watched()``
(variables whose changes wake it), ``attach(store)`` (one-off registration,
e.g. graph edges), ``propagate(store)`` (raise ``Fail`` on inconsistency) and
``satisfied(value)`` for checking a complete assignment.
"""
from __future__ import annotations

from typing import Callable, Iterable, Sequence

from .store import Fail, Store

_INF = float("inf")


def _floordiv(a: int, b: int) -> int:
    return a // b


def _ceildiv(a: int, b: int) -> int:
    return -((-a) // b)


def tdiv(a: int, b: int) -> int:
    """Integer division truncating toward zero (Java ``/``)."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


class Constraint:
    queued = False

    def scope(self) -> Sequence[int]:
        raise NotImplementedError

    def watched(self) -> Iterable[int]:
        return self.scope()

    def attach(self, s: Store) -> None:
        pass

    def propagate(self, s: Store) -> None:
        raise NotImplementedError

    def satisfied(self, val: Callable[[int], int]) -> bool:
        raise NotImplementedError


class _Flag:
    """A boolean attribute on a constraint whose setting is trailed."""

    @staticmethod
    def set(s: Store, obj, name: str) -> None:
        setattr(obj, name, True)
        s.trail_undo(lambda _: setattr(obj, name, False), 0)


def normalize(s: Store, terms, const: int) -> tuple[dict[int, int], int]:
    """Merge equal variables and fold fixed ones into the constant."""
    out: dict[int, int] = {}
    lo, hi = s.lo, s.hi
    for c, x in terms:
        r = s.find(x)
        if lo[r] == hi[r]:
            const -= c * lo[r]
            continue
        n = out.get(r, 0) + c
        if n:
            out[r] = n
        else:
            del out[r]
    return out, const


def _term_min(s: Store, c: int, x: int) -> int:
    return c * s.lo[x] if c > 0 else c * s.hi[x]


def _term_max(s: Store, c: int, x: int) -> int:
    return c * s.hi[x] if c > 0 else c * s.lo[x]


def _unit_pair(terms: dict[int, int]):
    """Return (x, y) when terms are exactly ``x - y``."""
    if len(terms) != 2:
        return None
    (a, ca), (b, cb) = terms.items()
    if ca == 1 and cb == -1:
        return a, b
    if ca == -1 and cb == 1:
        return b, a
    return None


class Linear(Constraint):
    """``sum(c * x) <= const`` or ``sum(c * x) == const``."""

    def __init__(self, terms: Sequence[tuple[int, int]], op: str, const: int):
        assert op in ("<=", "==")
        self.terms = [(int(c), int(x)) for c, x in terms if c]
        self.op = op
        self.const = int(const)

    def scope(self):
        return [x for _, x in self.terms]

    def __repr__(self):
        body = " + ".join(f"{c}*v{x}" for c, x in self.terms) or "0"
        return f"Linear({body} {self.op} {self.const})"

    def attach(self, s: Store) -> None:
        terms, k = {}, self.const
        for c, x in self.terms:
            terms[x] = terms.get(x, 0) + c
        pair = _unit_pair({x: c for x, c in terms.items() if c})
        if pair is not None:
            x, y = pair
            s.add_edge(y, x, k)
            if self.op == "==":
                s.add_edge(x, y, -k)

    def propagate(self, s: Store) -> None:
        terms, k = normalize(s, self.terms, self.const)
        eq = self.op == "=="
        if not terms:
            if (k != 0) if eq else (k < 0):
                raise Fail
            return
        if len(terms) == 1:
            (x, c), = terms.items()
            if eq:
                if k % c:
                    raise Fail
                s.assign(x, k // c)
            elif c > 0:
                s.set_max(x, _floordiv(k, c))
            else:
                s.set_min(x, _ceildiv(k, c))
            return
        if len(terms) == 2:
            pair = _unit_pair(terms)
            if pair is not None:
                x, y = pair
                s.add_edge(y, x, k)
                if eq:
                    s.add_edge(x, y, -k)
        items = list(terms.items())
        mins = [_term_min(s, c, x) for x, c in items]
        total_min = sum(mins)
        if total_min > k:
            raise Fail
        for (x, c), m in zip(items, mins):
            slack = k - (total_min - m)
            if c > 0:
                s.set_max(x, _floordiv(slack, c))
            else:
                s.set_min(x, _ceildiv(slack, c))
        if eq:
            maxs = [_term_max(s, c, x) for x, c in items]
            total_max = sum(maxs)
            if total_max < k:
                raise Fail
            for (x, c), m in zip(items, maxs):
                need = k - (total_max - m)
                if c > 0:
                    s.set_min(x, _ceildiv(need, c))
                else:
                    s.set_max(x, _floordiv(need, c))

    def satisfied(self, val) -> bool:
        t = sum(c * val(x) for c, x in self.terms)
        return t == self.const if self.op == "==" else t <= self.const


class NotEqual(Constraint):
    """``sum(c * x) != const``."""

    def __init__(self, terms: Sequence[tuple[int, int]], const: int):
        self.terms = [(int(c), int(x)) for c, x in terms if c]
        self.const = int(const)

    def scope(self):
        return [x for _, x in self.terms]

    def propagate(self, s: Store) -> None:
        terms, k = normalize(s, self.terms, self.const)
        if not terms:
            if k == 0:
                raise Fail
            return
        if len(terms) == 1:
            (x, c), = terms.items()
            if k % c == 0:
                s.remove(x, k // c)
            return
        pair = _unit_pair(terms)
        if pair is not None:
            x, y = pair
            if s.distance(y, x) <= k and s.distance(x, y) <= -k:
                raise Fail

    def satisfied(self, val) -> bool:
        return sum(c * val(x) for c, x in self.terms) != self.const


class DiffLe(Constraint):
    """``v - u <= w`` kept in the difference graph."""

    def __init__(self, u: int, v: int, w: int):
        self.u, self.v, self.w = int(u), int(v), int(w)

    def scope(self):
        return [self.u, self.v]

    def attach(self, s: Store) -> None:
        s.add_edge(self.u, self.v, self.w)

    def propagate(self, s: Store) -> None:
        s.set_max(self.v, s.hi[self.u] + self.w)
        s.set_min(self.u, s.lo[self.v] - self.w)

    def satisfied(self, val) -> bool:
        return val(self.v) - val(self.u) <= self.w


class Equal(Constraint):
    """``x == y`` with full domain synchronisation and class merging."""

    def __init__(self, x: int, y: int):
        self.x, self.y = int(x), int(y)

    def scope(self):
        return [self.x, self.y]

    def attach(self, s: Store) -> None:
        s.union(self.x, self.y)
        s.add_edge(self.x, self.y, 0)
        s.add_edge(self.y, self.x, 0)

    def propagate(self, s: Store) -> None:
        x, y = self.x, self.y
        lo = max(s.lo[x], s.lo[y])
        hi = min(s.hi[x], s.hi[y])
        s.set_bounds(x, lo, hi)
        s.set_bounds(y, lo, hi)
        hx, hy = s.holes[x], s.holes[y]
        if hx != hy:
            for h in (hx or ()):
                s.remove(y, h)
            for h in (hy or ()):
                s.remove(x, h)

    def satisfied(self, val) -> bool:
        return val(self.x) == val(self.y)


class Reified(Constraint):
    """``b <=> (sum(c * x) op const)`` with op in ``<=``, ``==``."""

    def __init__(self, b: int, terms: Sequence[tuple[int, int]], op: str, const: int):
        assert op in ("<=", "==")
        self.b = int(b)
        self.terms = [(int(c), int(x)) for c, x in terms if c]
        self.op = op
        self.const = int(const)
        self.done = False

    def scope(self):
        return [self.b] + [x for _, x in self.terms]

    def __repr__(self):
        body = " + ".join(f"{c}*v{x}" for c, x in self.terms) or "0"
        return f"Reified(v{self.b} <=> {body} {self.op} {self.const})"

    def attach(self, s: Store) -> None:
        s.set_bounds(self.b, 0, 1)

    def _decide(self, s: Store):
        terms, k = normalize(s, self.terms, self.const)
        lo = sum(_term_min(s, c, x) for x, c in terms.items())
        hi = sum(_term_max(s, c, x) for x, c in terms.items())
        if self.op == "<=":
            if hi <= k:
                return 1
            if lo > k:
                return 0
        else:
            if lo == hi == k:
                return 1
            if k < lo or k > hi:
                return 0
            if len(terms) == 1:
                (x, c), = terms.items()
                if k % c or not s.contains(x, k // c):
                    return 0
        pair = _unit_pair(terms)
        if pair is not None:
            x, y = pair
            up = s.distance(y, x)      # x - y <= up
            down = s.distance(x, y)    # y - x <= down
            if self.op == "<=":
                if up <= k:
                    return 1
                if -down > k:
                    return 0
            else:
                if up <= k and down <= -k:
                    return 1
                if up < k or -down > k:
                    return 0
        return None

    def propagate(self, s: Store) -> None:
        if self.done:
            return
        b = self.b
        if s.lo[b] == s.hi[b]:
            _Flag.set(s, self, "done")
            if s.lo[b] == 1:
                s.post_internal(make_relation(self.terms, self.op, self.const))
            else:
                s.post_internal(make_negation(self.terms, self.op, self.const))
            return
        d = self._decide(s)
        if d is not None:
            s.assign(b, d)

    def satisfied(self, val) -> bool:
        t = sum(c * val(x) for c, x in self.terms)
        truth = t == self.const if self.op == "==" else t <= self.const
        return val(self.b) == int(truth)


def make_relation(terms, op: str, const: int) -> Constraint:
    """Best propagator for ``sum(c * x) op const``."""
    terms = [(c, x) for c, x in terms if c]
    if op == "==" and len(terms) == 2:
        (c1, x1), (c2, x2) = terms
        if const == 0 and c1 == -c2 and abs(c1) == 1 and x1 != x2:
            return Equal(x1, x2)
    return Linear(terms, op, const)


def make_negation(terms, op: str, const: int) -> Constraint:
    if op == "<=":
        return Linear([(-c, x) for c, x in terms], "<=", -const - 1)
    return NotEqual(terms, const)


class BoolAnd(Constraint):
    """``r <=> and(xs)`` over 0/1 variables."""

    def __init__(self, r: int, xs: Sequence[int]):
        self.r = int(r)
        self.xs = [int(x) for x in xs]

    def scope(self):
        return [self.r] + self.xs

    def attach(self, s: Store) -> None:
        for v in self.scope():
            s.set_bounds(v, 0, 1)

    def propagate(self, s: Store) -> None:
        lo, hi = s.lo, s.hi
        free = []
        for x in self.xs:
            if hi[x] == 0:
                s.assign(self.r, 0)
                return
            if lo[x] == 0:
                free.append(x)
        if not free:
            s.assign(self.r, 1)
            return
        r = self.r
        if lo[r] == 1:
            for x in free:
                s.assign(x, 1)
        elif hi[r] == 0 and len(free) == 1:
            s.assign(free[0], 0)

    def satisfied(self, val) -> bool:
        return val(self.r) == int(all(val(x) for x in self.xs))


class BoolOr(Constraint):
    """``r <=> or(xs)`` over 0/1 variables."""

    def __init__(self, r: int, xs: Sequence[int]):
        self.r = int(r)
        self.xs = [int(x) for x in xs]

    def scope(self):
        return [self.r] + self.xs

    def attach(self, s: Store) -> None:
        for v in self.scope():
            s.set_bounds(v, 0, 1)

    def propagate(self, s: Store) -> None:
        lo, hi = s.lo, s.hi
        free = []
        for x in self.xs:
            if lo[x] == 1:
                s.assign(self.r, 1)
                return
            if hi[x] == 1:
                free.append(x)
        if not free:
            s.assign(self.r, 0)
            return
        r = self.r
        if hi[r] == 0:
            for x in free:
                s.assign(x, 0)
        elif lo[r] == 1 and len(free) == 1:
            s.assign(free[0], 1)

    def satisfied(self, val) -> bool:
        return val(self.r) == int(any(val(x) for x in self.xs))


def BoolNot(r: int, x: int) -> Constraint:
    """``r <=> not x``."""
    return Linear([(1, r), (1, x)], "==", 1)


class Mult(Constraint):
    """``x * y == z`` with bounds consistency."""

    def __init__(self, x: int, y: int, z: int):
        self.x, self.y, self.z = int(x), int(y), int(z)

    def scope(self):
        return [self.x, self.y, self.z]

    def propagate(self, s: Store) -> None:
        x, y, z = self.x, self.y, self.z
        if s.find(x) == s.find(y):
            self._square(s, x, z)
            return
        xl, xh, yl, yh = s.lo[x], s.hi[x], s.lo[y], s.hi[y]
        p = (xl * yl, xl * yh, xh * yl, xh * yh)
        s.set_bounds(z, min(p), max(p))
        self._divide(s, x, y, z)
        self._divide(s, y, x, z)
        if s.lo[x] == s.hi[x] and s.lo[y] == s.hi[y]:
            s.assign(z, s.lo[x] * s.lo[y])

    @staticmethod
    def _divide(s: Store, x: int, y: int, z: int) -> None:
        # x = z / y when y keeps a constant sign
        yl, yh = s.lo[y], s.hi[y]
        if yl <= 0 <= yh:
            if yl == yh == 0:
                s.assign(z, 0)
            return
        zl, zh = s.lo[z], s.hi[z]
        # x lies between the rational corners z/y; round them inward
        cands_lo = [_ceildiv(a, b) if b > 0 else _ceildiv(-a, -b) for a in (zl, zh) for b in (yl, yh)]
        cands_hi = [_floordiv(a, b) if b > 0 else _floordiv(-a, -b) for a in (zl, zh) for b in (yl, yh)]
        s.set_bounds(x, min(cands_lo), max(cands_hi))

    @staticmethod
    def _square(s: Store, x: int, z: int) -> None:
        xl, xh = s.lo[x], s.hi[x]
        if xl >= 0:
            zl, zh = xl * xl, xh * xh
        elif xh <= 0:
            zl, zh = xh * xh, xl * xl
        else:
            zl, zh = 0, max(xl * xl, xh * xh)
        s.set_bounds(z, zl, zh)
        zl, zh = s.lo[z], s.hi[z]
        if zh < 0:
            raise Fail
        r = _isqrt(zh)
        s.set_bounds(x, -r, r)
        if zl > 0:
            m = _isqrt(zl - 1) + 1  # smallest |x| with x*x >= zl
            xl, xh = s.lo[x], s.hi[x]
            if xl > -m:
                s.set_min(x, m)
            elif xh < m:
                s.set_max(x, -m)
        if s.lo[x] == s.hi[x]:
            s.assign(z, s.lo[x] * s.lo[x])

    def satisfied(self, val) -> bool:
        return val(self.x) * val(self.y) == val(self.z)


def _isqrt(n: int) -> int:
    import math
    return math.isqrt(n)


class Div(Constraint):
    """``z == x / y`` with truncation toward zero; ``y == 0`` is inconsistent."""

    def __init__(self, x: int, y: int, z: int):
        self.x, self.y, self.z = int(x), int(y), int(z)

    def scope(self):
        return [self.x, self.y, self.z]

    def propagate(self, s: Store) -> None:
        x, y, z = self.x, self.y, self.z
        s.remove(y, 0)
        yl, yh = s.lo[y], s.hi[y]
        if yl < 0 < yh:
            return  # divisor may change sign; wait for it to settle
        xl, xh = s.lo[x], s.hi[x]
        q = [tdiv(a, b) for a in (xl, xh) for b in (yl, yh)]
        if xl < 0 < xh:
            q.append(0)
        s.set_bounds(z, min(q), max(q))
        if yl == yh:
            d = yl
            a = abs(d)
            zl, zh = s.lo[z], s.hi[z]
            if d > 0:
                lo = zl * d if zl > 0 else zl * d - (a - 1)
                hi = zh * d if zh < 0 else zh * d + (a - 1)
            else:
                lo = zh * d if zh < 0 else zh * d - (a - 1)
                hi = zl * d if zl > 0 else zl * d + (a - 1)
            s.set_bounds(x, lo, hi)
            if s.lo[x] == s.hi[x]:
                s.assign(z, tdiv(s.lo[x], d))

    def satisfied(self, val) -> bool:
        d = val(self.y)
        return d != 0 and tdiv(val(self.x), d) == val(self.z)


def _disjoint(s: Store, a: int, b: int) -> bool:
    if s.hi[a] < s.lo[b] or s.hi[b] < s.lo[a]:
        return True
    if s.lo[a] == s.hi[a]:
        return not s.contains(b, s.lo[a])
    if s.lo[b] == s.hi[b]:
        return not s.contains(a, s.lo[b])
    return False


_SUPPORT_LIMIT = 64


class Element(Constraint):
    """``value == table[index]`` for a variable index."""

    def __init__(self, index: int, table: Sequence[int], value: int):
        if not table:
            raise ValueError("Element table must be non-empty")
        self.index = int(index)
        self.table = [int(t) for t in table]
        self.value = int(value)
        self.single = False
        self._last_index = None

    def scope(self):
        return [self.index, self.value] + self.table

    def _choices(self, s: Store):
        t = self.table
        return [t[j] for j in s.values(self.index)]

    def attach(self, s: Store) -> None:
        s.set_bounds(self.index, 0, len(self.table) - 1)
        s.add_hull(self.value, lambda: self._choices(s), self.table)

    def propagate(self, s: Store) -> None:
        idx, val, table = self.index, self.value, self.table
        if self.single:
            return
        before = (s.lo[idx], s.hi[idx], s.holes[idx])
        relational = before != self._last_index
        fwd = bwd = None
        if relational and (s.out[val] or s.inn[val] or s.hull_users[val]):
            fwd, bwd = s.reach(val)
        for j in list(s.values(idx)):
            t = table[j]
            if _disjoint(s, val, t):
                s.remove(idx, j)
            elif fwd is not None and s.find(t) != s.find(val):
                # one search from val in each direction covers every slot
                if fwd.get(t, _INF) < 0 or bwd.get(t, _INF) < 0:
                    s.remove(idx, j)
        if s.lo[idx] == s.hi[idx]:
            _Flag.set(s, self, "single")
            s.post_internal(Equal(val, table[s.lo[idx]]))
            return
        choices = [table[j] for j in s.values(idx)]
        s.set_bounds(val, min(s.lo[t] for t in choices), max(s.hi[t] for t in choices))
        if s.size(val) <= _SUPPORT_LIMIT:
            for v in list(s.values(val)):
                if not any(s.contains(t, v) for t in choices):
                    s.remove(val, v)
        after = (s.lo[idx], s.hi[idx], s.holes[idx])
        old = self._last_index
        if after != old:
            s.bump_graph(val)
        self._last_index = after
        s.trail_undo(self._restore_last, (old,))

    def _restore_last(self, box) -> None:
        self._last_index = box[0]

    def satisfied(self, val) -> bool:
        i = val(self.index)
        return 0 <= i < len(self.table) and val(self.table[i]) == val(self.value)


class OneOf(Constraint):
    """``value`` equals one of ``choices`` (redundant hull for conditional writes)."""

    def __init__(self, value: int, choices: Sequence[int]):
        self.value = int(value)
        self.choices = [int(c) for c in choices]
        self.single = False

    def scope(self):
        return [self.value] + self.choices

    def attach(self, s: Store) -> None:
        choices = tuple(self.choices)
        s.add_hull(self.value, lambda: choices, choices)

    def propagate(self, s: Store) -> None:
        if self.single:
            return
        val = self.value
        live = [c for c in self.choices if not _disjoint(s, val, c)]
        if not live:
            raise Fail
        if len(live) == 1:
            _Flag.set(s, self, "single")
            s.post_internal(Equal(val, live[0]))
            return
        s.set_bounds(val, min(s.lo[c] for c in live), max(s.hi[c] for c in live))

    def satisfied(self, val) -> bool:
        return any(val(c) == val(self.value) for c in self.choices)


class AllDifferent(Constraint):
    """Pairwise disequality with value pruning (decomposition strength)."""

    def __init__(self, xs: Sequence[int]):
        self.xs = [int(x) for x in xs]

    def scope(self):
        return list(self.xs)

    def propagate(self, s: Store) -> None:
        xs = self.xs
        reps = [s.find(x) for x in xs]
        if len(set(reps)) < len(reps):
            raise Fail
        changed = True
        while changed:
            changed = False
            fixed = {}
            for x in xs:
                if s.lo[x] == s.hi[x]:
                    v = s.lo[x]
                    if v in fixed:
                        raise Fail
                    fixed[v] = x
            for x in xs:
                if s.lo[x] != s.hi[x]:
                    for v in fixed:
                        if s.remove(x, v) and s.lo[x] == s.hi[x]:
                            changed = True

    def satisfied(self, val) -> bool:
        vals = [val(x) for x in self.xs]
        return len(set(vals)) == len(vals)
