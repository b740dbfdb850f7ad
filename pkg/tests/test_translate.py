import itertools

import pytest

from fdverify.lang import ast as A
from fdverify.solver import Element, Store
from fdverify.translate import (
    InstanceParams, MissingLength, NonConstantQuantifierBound, SsaEnv, Translator,
    negate_ensures,
)

V, I = A.VarRef, A.IntLit


def B(op, a, b):
    return A.Binary(op, a, b)


def setup(lengths=None, scalars=(), arrays=()):
    s = Store()
    tr = Translator(s, InstanceParams(lengths=dict(lengths or {})))
    env = SsaEnv()
    for name, lo, hi in scalars:
        env = env.with_scalar(name, 0, tr.fresh(name, 0, lo, hi))
    for name, values in arrays:
        slots = tuple(s.new_var(*v) if isinstance(v, tuple) else s.const(v) for v in values)
        env = env.with_array(name, 0, slots)
    return s, tr, env


def dom(s, v):
    return set(s.values(v))


def test_literal_is_a_constant():
    s, tr, env = setup()
    v = tr.expr(env, I(5))
    assert s.lo[v] == s.hi[v] == 5


def test_symbolic_read_posts_element():
    s, tr, env = setup(scalars=[("k", -100, 100)], arrays=[("t", [(0, 9)] * 40)])
    v = tr.expr(env, A.ArrayRead("t", V("k")))
    k = env.scalar("k")
    assert (s.lo[k], s.hi[k]) == (0, 39)
    assert any(isinstance(c, Element) and c.value == v for c in s.props)


def test_square_is_bounded():
    s, tr, env = setup(scalars=[("i", 0, 8)])
    z = tr.expr(env, B("*", V("i"), V("i")))
    assert dom(s, z) <= set(range(65)) and s.hi[z] == 64


def test_increment_creates_next_version():
    s, tr, env = setup(scalars=[("trityp", 0, 0)])
    env = tr.assign(env, "trityp", B("+", V("trityp"), I(1)))
    version, var = env.scalars["trityp"]
    assert version == 1 and s.value(var) == 1


def test_self_assignment_keeps_solutions():
    s, tr, env = setup(scalars=[("x", 0, 3)])
    old = env.scalar("x")
    env = tr.assign(env, "x", V("x"))
    new = env.scalar("x")
    for a in range(4):
        m = s.push()
        assert s.try_update(lambda: s.assign(old, a))
        assert s.value(new) == a
        s.pop(m)


def test_accumulate_square():
    s, tr, env = setup(scalars=[("s", 0, 0), ("i", 1, 1)])
    env = tr.assign(env, "s", B("+", V("s"), B("*", V("i"), V("i"))))
    assert s.value(env.scalar("s")) == 1


def test_swap_with_fixed_index():
    s, tr, env = setup(scalars=[("j", 0, 0)], arrays=[("tab", [(0, 100)] * 8)])
    old = env.array("tab")
    env = tr.assign_array(env, "tab", V("j"), A.ArrayRead("tab", B("+", V("j"), I(1))))
    new = env.array("tab")
    assert new[0] == old[1]
    assert new[1:] == old[1:]


def test_self_store_is_pointwise_equal():
    s, tr, env = setup(arrays=[("a", [(0, 3), (0, 3)])])
    old = env.array("a")
    env = tr.assign_array(env, "a", I(0), A.ArrayRead("a", I(0)))
    new = env.array("a")
    assert new[0] == old[0] and new[1] == old[1]


def test_symbolic_store_has_exactly_two_outcomes():
    s, tr, env = setup(scalars=[("idx", 0, 1)], arrays=[("a", [1, 2])])
    env = tr.assign_array(env, "a", V("idx"), I(9))
    idx = env.scalar("idx")
    new = env.array("a")
    seen = set()
    for i, x, y in itertools.product(range(2), range(0, 10), range(0, 10)):
        m = s.push()
        ok = (s.try_update(lambda: s.assign(idx, i)) and s.try_update(lambda: s.assign(new[0], x))
              and s.try_update(lambda: s.assign(new[1], y)) and s.solve() is not None)
        if ok:
            seen.add((i, x, y))
        s.pop(m)
    assert seen == {(0, 9, 2), (1, 1, 9)}


def _sorted_formula(n):
    i = V("i")
    return A.ForAll("i", I(0), B("-", A.LengthOf("tab"), I(1)),
                    A.Atom(B("<=", A.ArrayRead("tab", i), A.ArrayRead("tab", B("+", i, I(1))))))


def test_forall_expands_to_instances():
    s, tr, env = setup(lengths={"tab": 8}, arrays=[("tab", [(0, 9)] * 8)])
    cases = negate_ensures(tr, env, _sorted_formula(8))
    assert len(cases) == 7


def test_empty_forall_is_true():
    s, tr, env = setup(lengths={"tab": 0}, arrays=[("tab", [])])
    b = tr.formula(env, _sorted_formula(0))
    assert s.value(b) == 1


def test_alldifferent_reified_false():
    s, tr, env = setup(arrays=[("t", [0, 1, 1])])
    b = tr.formula(env, A.AllDifferent("t"))
    assert s.value(b) == 0


def test_single_case_for_plain_ensures():
    s, tr, env = setup(scalars=[("x", 0, 5)])
    res = s.new_var(0, 5)
    ens = A.Atom(B("==", A.ResultRef(), V("x")))
    cases = negate_ensures(tr, env, ens, res)
    assert len(cases) == 1
    m = s.push()
    assert tr.assume_not(env, cases[0].formula, res)
    sol = s.solve()
    assert sol[res] != sol[env.scalar("x")]
    s.pop(m)


def test_tritype_ensures_splits_in_four(corpus):
    tp = corpus("tritype.mimp")
    s, tr, env = setup(scalars=[(n, 0, 10) for n in "ijk"])
    cases = negate_ensures(tr, env, tp.program.contract.ensures, s.new_var(0, 4))
    assert len(cases) == 4
    assert all(isinstance(c.formula, A.Implies) for c in cases)


def test_bsearch_cases(corpus):
    tp = corpus("binarySearch.mimp")
    s, tr, env = setup(lengths={"tab": 4}, scalars=[("x", 0, 3)], arrays=[("tab", [(0, 3)] * 4)])
    res = s.new_var(-1, 3)
    cases = negate_ensures(tr, env, tp.program.contract.ensures, res)
    assert len(cases) == 2
    # case 1: not found although some slot holds x
    m = s.push()
    assert tr.assume_not(env, cases[0].formula, res)
    sol = s.solve()
    assert sol[res] == -1 and sol[env.scalar("x")] in [sol[v] for v in env.array("tab")]
    s.pop(m)
    # case 2: a found index whose slot differs from x
    m = s.push()
    assert tr.assume_not(env, cases[1].formula, res)
    sol = s.solve()
    r = sol[res]
    assert r != -1 and sol[env.array("tab")[r]] != sol[env.scalar("x")]
    s.pop(m)


def test_missing_length():
    s, tr, env = setup()
    with pytest.raises(MissingLength):
        tr.length("t")


def test_huge_symbolic_quantifier_rejected():
    s, tr, env = setup(scalars=[("n", 0, 2147483646)])
    f = A.ForAll("i", I(0), V("n"), A.Atom(B(">=", V("i"), I(0))))
    with pytest.raises(NonConstantQuantifierBound):
        tr.formula(env, f)
