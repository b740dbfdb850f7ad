import pytest

from fdverify.solver import (
    INT_MAX, INT_MIN, AllDifferent, Div, Element, InvalidDomain, LinearEq, LinearLe,
    MarkOrderViolation, Mult, NotEqual, ResourceExceeded, SearchConfig, Store, tdiv,
)


def test_default_bounds():
    s = Store()
    v = s.new_var()
    assert (s.lo[v], s.hi[v]) == (INT_MIN, INT_MAX) == (-2147483647, 2147483646)


def test_singleton_and_empty_domain():
    s = Store()
    assert s.is_fixed(s.new_var(5, 5))
    with pytest.raises(InvalidDomain):
        s.new_var(3, 2)


def test_linear_then_conflicting_bound():
    s = Store()
    x, y = s.new_var(0, 10), s.new_var(0, 10)
    assert s.post(LinearEq([(1, x), (1, y)], 3))
    assert (s.lo[x], s.hi[x]) == (0, 3)
    assert not s.post(LinearLe([(-1, x)], -5))


def test_square_bounds():
    s = Store()
    x, z = s.new_var(0, 8), s.new_var()
    assert s.post(Mult(x, x, z))
    assert (s.lo[z], s.hi[z]) == (0, 64)


def test_midpoint_division():
    s = Store()
    l, u, m = s.new_var(0, 0), s.new_var(7, 7), s.new_var()
    total = s.new_var()
    assert s.post(LinearEq([(1, l), (1, u), (-1, total)], 0))
    assert s.post(Div(total, s.const(2), m))
    assert s.value(m) == 3


def test_truncating_division():
    assert tdiv(7, 2) == 3
    assert tdiv(-7, 2) == -3
    assert tdiv(7, -2) == -3
    assert tdiv(-7, -2) == 3


def test_element_prunes_index_by_value():
    s = Store()
    t = [s.const(c) for c in (5, 7, 6, 9)]
    k, v = s.new_var(), s.new_var(6, 6)
    assert s.post(Element(k, t, v))
    assert s.value(k) == 2


def test_element_fixed_index_channels_value():
    s = Store()
    t = [s.new_var(0, 9), s.new_var(3, 5), s.new_var(0, 1)]
    k, v = s.new_var(1, 1), s.new_var(4, 20)
    assert s.post(Element(k, t, v))
    assert (s.lo[v], s.hi[v]) == (4, 5)


def test_alldifferent_pairwise_pruning():
    s = Store()
    x, y = s.new_var(1, 1), s.new_var(1, 2)
    assert s.post(AllDifferent([x, y]))
    assert s.value(y) == 2


def test_push_pop_restores_domains():
    s = Store()
    x = s.new_var(0, 10)
    mark = s.push()
    assert s.post(LinearEq([(1, x)], 3))
    s.pop(mark)
    assert (s.lo[x], s.hi[x]) == (0, 10)


def test_pop_clears_failure():
    s = Store()
    x = s.new_var(0, 1)
    mark = s.push()
    assert not s.post(LinearEq([(1, x)], 5))
    assert s.failed
    s.pop(mark)
    assert not s.failed and s.propagate()


def test_nested_marks_must_be_lifo():
    s = Store()
    x = s.new_var(0, 10)
    before = s.snapshot()
    outer = s.push()
    s.try_update(lambda: s.set_min(x, 2))
    inner = s.push()
    s.try_update(lambda: s.set_max(x, 4))
    with pytest.raises(MarkOrderViolation):
        s.pop(outer)
    s.pop(inner)
    s.pop(outer)
    assert s.snapshot() == before


def test_antisymmetry_has_no_solution():
    s = Store()
    x, y = s.new_var(1, 3), s.new_var(1, 3)
    s.post(AllDifferent([x, y]))
    s.post(LinearLe([(1, x), (-1, y)], -1))
    s.post(LinearLe([(1, y), (-1, x)], -1))
    assert s.solve([x, y]) is None


def test_pigeonhole_needs_search():
    s = Store()
    xs = [s.new_var(1, 2) for _ in range(3)]
    assert s.post(AllDifferent(xs))
    assert s.solve(xs) is None


def test_solve_returns_least_solution_and_restores():
    s = Store()
    x, y = s.new_var(0, 5), s.new_var(0, 5)
    s.post(LinearEq([(1, x), (1, y)], 5))
    s.post(NotEqual([(1, x)], 0))
    sol = s.solve([x, y])
    assert (sol[x], sol[y]) == (1, 4)
    assert (s.lo[x], s.hi[x]) == (1, 5)


def test_wide_domains_are_searched_quickly():
    # value-by-value labeling would need billions of nodes here
    s = Store()
    x, y = s.new_var(), s.new_var()
    s.post(LinearLe([(1, y), (-1, x)], -1000))
    s.post(NotEqual([(1, x)], INT_MIN + 1000))
    sol = s.solve([x, y], SearchConfig(max_nodes=2000))
    assert sol[x] - sol[y] >= 1000
    assert sol[x] == INT_MIN + 1001


def test_node_budget():
    s = Store()
    xs = [s.new_var(0, 3) for _ in range(6)]
    s.post(AllDifferent(xs))
    with pytest.raises(ResourceExceeded):
        s.solve(xs, SearchConfig(max_nodes=10))


def test_difference_graph_detects_cycle():
    s = Store()
    x, y, z = s.new_var(), s.new_var(), s.new_var()
    assert s.post(LinearLe([(1, x), (-1, y)], -1))    # x < y
    assert s.post(LinearLe([(1, y), (-1, z)], -1))    # y < z
    assert not s.post(LinearLe([(1, z), (-1, x)], 0))  # z <= x
