"""Backtrackable finite-domain store.

Domains are integer intervals with an optional, capped set of interior holes.
Besides per-variable domains the store keeps two pieces of relational state
that plain bounds propagation cannot express cheaply:

* a union-find over variables known to be equal, used to normalise linear
  terms (``i + j <= k`` with ``i == j == k`` collapses to ``i <= 0``);
* a difference graph of binary facts ``v - u <= w`` plus "hull" facts
  (``v`` equals one of a set of choices).  Negative cycles are detected when
  edges are added, which is what keeps propagation from crawling through
  2**32 values one step at a time.

Everything mutable is recorded on a single trail so ``pop`` restores the
exact state of the matching ``push``.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

INT_MIN = -2147483647
INT_MAX = 2147483646
HOLE_CAP = 64
SPLIT_WIDTH = 16

_INF = float("inf")


class SolverError(Exception):
    pass


class InvalidDomain(SolverError, ValueError):
    pass


class ForeignVariable(SolverError):
    pass


class MarkOrderViolation(SolverError):
    pass


class ResourceExceeded(SolverError):
    def __init__(self, which: str):
        super().__init__(which)
        self.which = which


class Fail(Exception):
    """Raised inside propagation when some domain becomes empty."""


class VarId(int):
    """Index into a store's variable table, tagged with its owner."""

    def __new__(cls, index: int, owner: "Store"):
        obj = int.__new__(cls, index)
        obj.owner = owner
        return obj

    def __repr__(self):
        return f"VarId({int(self)})"


@dataclass(frozen=True)
class Domain:
    min: int
    max: int
    holes: frozenset = frozenset()

    def __contains__(self, value: int) -> bool:
        return self.min <= value <= self.max and value not in self.holes

    def __iter__(self) -> Iterator[int]:
        for v in range(self.min, self.max + 1):
            if v not in self.holes:
                yield v

    def size(self) -> int:
        return self.max - self.min + 1 - len(self.holes)

    @property
    def fixed(self) -> bool:
        return self.min == self.max


@dataclass
class Mark:
    depth: int
    trail_len: int
    nvars: int
    nprops: int
    failed: bool


@dataclass
class SearchConfig:
    """Labeling knobs.  ``var_order`` is ``"input"`` (first unfixed in the
    given order) or ``"first_fail"`` (smallest domain first)."""

    var_order: str = "input"
    max_nodes: Optional[int] = None
    time_limit: Optional[float] = None  # seconds


class _Search:
    """Resumable single-source shortest-path state over the difference graph."""

    __slots__ = ("src", "forward", "dist", "count", "memo")

    def __init__(self, src: int, forward: bool):
        self.src = src
        self.forward = forward
        self.dist = {src: 0}
        self.count: dict = {}
        self.memo: dict = {}


class Store:
    def __init__(self, hole_cap: int = HOLE_CAP):
        self.hole_cap = hole_cap
        self.lo: list[int] = []
        self.hi: list[int] = []
        self.holes: list[Optional[frozenset]] = []
        self.names: list[str] = []
        self.initial: list[tuple[int, int]] = []
        self.watch: list[list] = []
        self.parent: list[int] = []
        self.members: list[list[int]] = []
        self.out: list[list[tuple[int, int]]] = []
        self.inn: list[list[tuple[int, int]]] = []
        self.hulls: list[list] = []
        self.hull_users: list[list[int]] = []
        self.props: list = []
        self.memo: dict = {}
        self._trail: list[tuple] = []
        self._marks: list[Mark] = []
        self._queue: deque = deque()
        self.failed = False
        self._gversion = 0
        self._gcache: dict = {}
        self.stats = {"propagations": 0, "nodes": 0}

    # ------------------------------------------------------------------
    # variables

    def new_var(self, lo: int = INT_MIN, hi: int = INT_MAX, name: Optional[str] = None) -> VarId:
        if lo > hi:
            raise InvalidDomain(f"empty domain [{lo}:{hi}]")
        v = len(self.lo)
        self.lo.append(lo)
        self.hi.append(hi)
        self.holes.append(None)
        self.names.append(name if name is not None else f"_v{v}")
        self.initial.append((lo, hi))
        self.watch.append([])
        self.parent.append(v)
        self.members.append([v])
        self.out.append([])
        self.inn.append([])
        self.hulls.append([])
        self.hull_users.append([])
        return VarId(v, self)

    def const(self, value: int) -> VarId:
        key = ("const", value)
        v = self.memo.get(key)
        if v is None:
            v = self.new_var(value, value, name=str(value))
            self.memo_set(key, v)
        return v

    def var(self, index: int) -> VarId:
        return VarId(index, self)

    @property
    def nvars(self) -> int:
        return len(self.lo)

    def check_var(self, v) -> int:
        if isinstance(v, VarId) and v.owner is not self:
            raise ForeignVariable(f"{v!r} belongs to another store")
        if not 0 <= v < len(self.lo):
            raise ForeignVariable(f"{v!r} is not a variable of this store")
        return int(v)

    def domain(self, v) -> Domain:
        return Domain(self.lo[v], self.hi[v], self.holes[v] or frozenset())

    def is_fixed(self, v) -> bool:
        return self.lo[v] == self.hi[v]

    def value(self, v) -> int:
        if self.lo[v] != self.hi[v]:
            raise ValueError(f"{self.names[v]} is not fixed")
        return self.lo[v]

    def contains(self, v, value: int) -> bool:
        if value < self.lo[v] or value > self.hi[v]:
            return False
        h = self.holes[v]
        return not (h and value in h)

    def size(self, v) -> int:
        h = self.holes[v]
        return self.hi[v] - self.lo[v] + 1 - (len(h) if h else 0)

    def values(self, v) -> Iterator[int]:
        h = self.holes[v] or ()
        for x in range(self.lo[v], self.hi[v] + 1):
            if x not in h:
                yield x

    def snapshot(self) -> list[Domain]:
        return [self.domain(v) for v in range(len(self.lo))]

    def dump(self) -> str:
        return "\n".join(f"{self.names[v]}[{self.lo[v]}:{self.hi[v]}]" for v in range(len(self.lo)))

    # ------------------------------------------------------------------
    # trail

    def _save(self, v: int) -> None:
        self._trail.append((v, self.lo[v], self.hi[v], self.holes[v]))

    def trail_undo(self, fn: Callable, arg=None) -> None:
        self._trail.append((fn, arg))

    def memo_set(self, key, value) -> None:
        self.memo[key] = value
        self._trail.append((self.memo.pop, key))

    def push(self) -> Mark:
        m = Mark(len(self._marks), len(self._trail), len(self.lo), len(self.props), self.failed)
        self._marks.append(m)
        return m

    def pop(self, mark: Optional[Mark] = None) -> None:
        if not self._marks:
            raise MarkOrderViolation("pop without matching push")
        top = self._marks[-1]
        if mark is not None and mark is not top:
            raise MarkOrderViolation("marks must be popped in LIFO order")
        self._marks.pop()
        trail = self._trail
        lo, hi, holes = self.lo, self.hi, self.holes
        while len(trail) > top.trail_len:
            e = trail.pop()
            if len(e) == 4:
                v, lo[v], hi[v], holes[v] = e
            else:
                fn, arg = e
                if arg is None:
                    fn()
                else:
                    fn(arg)
        n = top.nvars
        for table in (self.lo, self.hi, self.holes, self.names, self.initial, self.watch,
                      self.parent, self.members, self.out, self.inn, self.hulls, self.hull_users):
            del table[n:]
        del self.props[top.nprops:]
        self.failed = top.failed
        for p in self._queue:
            p.queued = False
        self._queue.clear()
        self._graph_changed()

    @property
    def depth(self) -> int:
        return len(self._marks)

    # ------------------------------------------------------------------
    # domain updates (raise Fail)

    def _wake(self, v: int) -> None:
        q = self._queue
        for p in self.watch[v]:
            if not p.queued:
                p.queued = True
                q.append(p)

    def set_min(self, v: int, m: int) -> bool:
        if m <= self.lo[v]:
            return False
        hi = self.hi[v]
        if m > hi:
            raise Fail
        h = self.holes[v]
        if h:
            while m in h:
                m += 1
            if m > hi:
                raise Fail
            h = frozenset(x for x in h if x > m) or None
        self._trail.append((v, self.lo[v], hi, self.holes[v]))
        self.lo[v] = m
        self.holes[v] = h
        self._wake(v)
        return True

    def set_max(self, v: int, m: int) -> bool:
        if m >= self.hi[v]:
            return False
        lo = self.lo[v]
        if m < lo:
            raise Fail
        h = self.holes[v]
        if h:
            while m in h:
                m -= 1
            if m < lo:
                raise Fail
            h = frozenset(x for x in h if x < m) or None
        self._trail.append((v, lo, self.hi[v], self.holes[v]))
        self.hi[v] = m
        self.holes[v] = h
        self._wake(v)
        return True

    def set_bounds(self, v: int, lo: int, hi: int) -> bool:
        a = self.set_min(v, lo)
        b = self.set_max(v, hi)
        return a or b

    def assign(self, v: int, value: int) -> bool:
        if not self.contains(v, value):
            raise Fail
        if self.lo[v] == self.hi[v]:
            return False
        self._trail.append((v, self.lo[v], self.hi[v], self.holes[v]))
        self.lo[v] = self.hi[v] = value
        self.holes[v] = None
        self._wake(v)
        return True

    def remove(self, v: int, value: int) -> bool:
        lo, hi = self.lo[v], self.hi[v]
        if value < lo or value > hi:
            return False
        h = self.holes[v]
        if h and value in h:
            return False
        if value == lo:
            return self.set_min(v, value + 1)
        if value == hi:
            return self.set_max(v, value - 1)
        if h and len(h) >= self.hole_cap:
            return False  # over the cap only bounds are tracked
        self._trail.append((v, lo, hi, h))
        self.holes[v] = (h | {value}) if h else frozenset((value,))
        self._wake(v)
        return True

    # ------------------------------------------------------------------
    # equality classes

    def find(self, v: int) -> int:
        p = self.parent
        while p[v] != v:
            v = p[v]
        return v

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if len(self.members[rx]) < len(self.members[ry]):
            rx, ry = ry, rx
        self.parent[ry] = rx
        self._trail.append((self._unparent, ry))
        mx = self.members[rx]
        n = len(mx)
        mx.extend(self.members[ry])
        self._trail.append((self._truncate_members, (rx, n)))
        for m in mx:
            self._wake(m)
        return True

    def _unparent(self, v: int) -> None:
        self.parent[v] = v

    def _truncate_members(self, arg) -> None:
        r, n = arg
        if r < len(self.members):
            del self.members[r][n:]

    # ------------------------------------------------------------------
    # difference graph

    def _graph_changed(self) -> None:
        self._gversion += 1
        self._gcache.clear()

    def bump_graph(self, h: Optional[int] = None) -> None:
        """Signal that the choices of hull ``h`` shrank (or, with no ``h``,
        that anything in the graph may have changed)."""
        if h is None:
            self._graph_changed()
            return
        self._gversion += 1
        # a search that never evaluated this hull holds nothing stale
        self._refresh(lambda st: self._reseed_hull(st, h) if h in st.memo else None)

    def _refresh(self, seed: Callable) -> None:
        # Cached searches only ever tighten under edge/hull additions and
        # hull narrowing, so they are resumed instead of recomputed.
        try:
            for st in self._gcache.values():
                q = seed(st)
                if q:
                    self._spfa(st, q)
        except Fail:
            self._gcache.clear()
            raise

    def _reseed_hull(self, st: "_Search", h: int) -> list:
        st.memo.pop(h, None)
        if h == st.src or not self.hulls[h]:
            return []
        nd = self._hull_bound(h, st.dist, st.memo)
        if nd < st.dist.get(h, _INF):
            st.dist[h] = nd
            return [h]
        return []

    def add_edge(self, u: int, v: int, w: int) -> None:
        """Record ``v - u <= w``; raise Fail on a negative cycle."""
        if u == v:
            if w < 0:
                raise Fail
            return
        lo, hi = self.lo, self.hi
        if lo[u] == hi[u] or lo[v] == hi[v]:
            # a fixed endpoint turns the edge into plain bounds
            self.set_max(v, hi[u] + w)
            self.set_min(u, lo[v] - w)
            return
        for x, wx in self.out[u]:
            if x == v and wx <= w:
                return
        back = self.distance(v, u)
        if back + w < 0:
            raise Fail
        self.out[u].append((v, w))
        self._trail.append((self.out[u].pop, None))
        self.inn[v].append((u, w))
        self._trail.append((self.inn[v].pop, None))
        self._gversion += 1

        def seed(st):
            a, b = (u, v) if st.forward else (v, u)
            da = st.dist.get(a)
            if da is not None and da + w < st.dist.get(b, _INF):
                st.dist[b] = da + w
                return [b]
            return []
        self._refresh(seed)
        if w == 0 and back == 0 and self.find(u) != self.find(v):
            from .propagators import Equal
            self.post_internal(Equal(u, v))

    def add_hull(self, h: int, choices_fn: Callable[[], Iterable[int]], candidates: Iterable[int]) -> None:
        """Record that ``h`` always equals one of ``choices_fn()``."""
        self.hulls[h].append(choices_fn)
        self._trail.append((self.hulls[h].pop, None))
        for c in set(candidates):
            self.hull_users[c].append(h)
            self._trail.append((self.hull_users[c].pop, None))
        self._gversion += 1
        self._refresh(lambda st: self._reseed_hull(st, h))

    def _hull_bound(self, h: int, dist: dict, memo: dict) -> float:
        lists = memo.get(h)
        if lists is None:
            lists = memo[h] = [list(fn()) for fn in self.hulls[h]]
        best = _INF
        for cs in lists:
            m = -_INF
            for c in cs:
                d = dist.get(c, _INF)
                if d > m:
                    m = d
                    if m == _INF:
                        break
            if m < best:
                best = m
        return best

    def _sssp(self, src: int, forward: bool) -> dict:
        key = (src, forward)
        st = self._gcache.get(key)
        if st is not None:
            return st.dist
        st = _Search(src, forward)
        self._spfa(st, [src])
        self._gcache[key] = st
        return st.dist

    def _spfa(self, st: "_Search", seeds: list) -> None:
        adj = self.out if st.forward else self.inn
        users = self.hull_users
        limit = len(self.lo) + 2
        src, dist, count, memo = st.src, st.dist, st.count, st.memo
        q = deque(seeds)
        inq = set(seeds)
        while q:
            u = q.popleft()
            inq.discard(u)
            du = dist[u]
            for v, w in adj[u]:
                nd = du + w
                if nd < dist.get(v, _INF):
                    dist[v] = nd
                    c = count.get(v, 0) + 1
                    if c > limit:
                        raise Fail
                    count[v] = c
                    if v not in inq:
                        inq.add(v)
                        q.append(v)
            for h in users[u]:
                if h == src:
                    continue
                nd = self._hull_bound(h, dist, memo)
                if nd < dist.get(h, _INF):
                    dist[h] = nd
                    c = count.get(h, 0) + 1
                    if c > limit:
                        raise Fail
                    count[h] = c
                    if h not in inq:
                        inq.add(h)
                        q.append(h)
        if dist[src] < 0:
            raise Fail

    def distance(self, u: int, v: int) -> float:
        """Tightest known upper bound on ``v - u`` from the graph (inf if none)."""
        if u == v:
            return 0
        d1 = d2 = _INF
        if self.out[u] or self.hull_users[u]:
            d1 = self._sssp(u, True).get(v, _INF)
        if self.inn[v] or self.hull_users[v]:
            d2 = self._sssp(v, False).get(u, _INF)
        return d1 if d1 < d2 else d2

    def reach(self, u: int) -> tuple:
        """Graph bounds from ``u``: ``(fwd, bwd)`` where ``fwd[v]`` bounds
        ``v - u`` and ``bwd[v]`` bounds ``u - v``."""
        return self._sssp(u, True), self._sssp(u, False)

    def upper_diff(self, x: int, y: int) -> float:
        """Upper bound on ``x - y`` from bounds and the graph."""
        b = self.hi[x] - self.lo[y]
        g = self.distance(y, x)
        return g if g < b else b

    # ------------------------------------------------------------------
    # posting and propagation

    def post(self, c) -> bool:
        """Register ``c`` and propagate; return False iff the store is inconsistent."""
        for v in c.scope():
            self.check_var(v)
        if self.failed:
            return False
        try:
            self._register(c)
            self._run()
        except Fail:
            self._fail()
            return False
        return True

    def post_internal(self, c) -> None:
        """Register a constraint from inside propagation (may raise Fail)."""
        self._register(c)

    def _register(self, c) -> None:
        self.props.append(c)
        c.queued = False
        for v in set(c.watched()):
            self.watch[v].append(c)
            self._trail.append((self.watch[v].pop, None))
        c.attach(self)
        if not c.queued:
            c.queued = True
            self._queue.append(c)

    def _run(self) -> None:
        q = self._queue
        stats = self.stats
        while q:
            p = q.popleft()
            p.queued = False
            stats["propagations"] += 1
            p.propagate(self)

    def _fail(self) -> None:
        for p in self._queue:
            p.queued = False
        self._queue.clear()
        self.failed = True

    def propagate(self) -> bool:
        if self.failed:
            return False
        for p in self.props:
            if not p.queued:
                p.queued = True
                self._queue.append(p)
        try:
            self._run()
        except Fail:
            self._fail()
            return False
        return True

    def try_update(self, fn: Callable[[], object]) -> bool:
        """Apply a direct domain update (e.g. ``lambda: s.assign(x, 3)``) and propagate."""
        if self.failed:
            return False
        try:
            fn()
            self._run()
        except Fail:
            self._fail()
            return False
        return True

    # ------------------------------------------------------------------
    # search

    def solve(self, variables: Iterable[int] = (), config: Optional[SearchConfig] = None) -> Optional[dict[int, int]]:
        """Depth-first labeling.  Returns a full assignment (all store
        variables, listed ones first in the ordering) or None."""
        config = config or SearchConfig()
        if self.failed:
            return None
        order = [self.check_var(v) for v in variables]
        seen = set(order)
        order.extend(v for v in range(len(self.lo)) if v not in seen)
        deadline = None if config.time_limit is None else time.monotonic() + config.time_limit
        budget = [config.max_nodes]
        mark = self.push()
        try:
            if not self.propagate():
                return None
            return self._label(order, 0, config, deadline, budget)
        finally:
            while self._marks[-1] is not mark:
                self.pop()
            self.pop(mark)

    def _pick(self, order: list[int], start: int, config: SearchConfig) -> tuple[int, int]:
        lo, hi = self.lo, self.hi
        if config.var_order == "first_fail":
            best, best_size = -1, None
            for v in order:
                if lo[v] != hi[v]:
                    sz = self.size(v)
                    if best_size is None or sz < best_size:
                        best, best_size = v, sz
            return best, start
        i = start
        n = len(order)
        while i < n and lo[order[i]] == hi[order[i]]:
            i += 1
        return (order[i] if i < n else -1), i

    def _label(self, order, start, config, deadline, budget) -> Optional[dict[int, int]]:
        # iterative DFS; each frame remembers how to take its right branch
        stack: list = []
        while True:
            x, start = self._pick(order, start, config)
            if x < 0:
                return {v: self.lo[v] for v in range(len(self.lo))}
            self.stats["nodes"] += 1
            if budget[0] is not None:
                budget[0] -= 1
                if budget[0] < 0:
                    raise ResourceExceeded("nodes")
            if deadline is not None and time.monotonic() > deadline:
                raise ResourceExceeded("time")
            lo = self.lo[x]
            mark = self.push()
            # try the minimum first; the right branch removes it
            ok = self.try_update(lambda: self.assign(x, lo))
            stack.append((mark, x, False, lo, start))
            while not ok:
                if not stack:
                    return None
                mark, y, split, v, start = stack.pop()
                self.pop(mark)
                if split:
                    ok = self.try_update(lambda: self.set_min(y, v))
                    continue
                ok = self.try_update(lambda: self.remove(y, v))
                if ok and self.hi[y] - self.lo[y] >= SPLIT_WIDTH:
                    # bisect what is left of a wide domain, lower half first:
                    # same first solution as ascending values, far fewer nodes
                    mid = self.lo[y] + (self.hi[y] - self.lo[y]) // 2
                    mark = self.push()
                    ok = self.try_update(lambda: self.set_max(y, mid))
                    stack.append((mark, y, True, mid + 1, start))
