import pytest

from fdverify import concrete_interpret, load
from fdverify.interp import OutOfBounds, PreconditionViolated, Pruned, StepBudgetExceeded, holds


def test_tritype_error_input(corpus):
    r = concrete_interpret(corpus("tritypeKO.mimp"), {"i": 1, "j": 1, "k": 2})
    assert r.result == 2
    assert r.assignments == [("trityp_0", 0), ("trityp_1", 0), ("trityp_2", 1), ("trityp_3", 2)]


def test_square_sum(corpus):
    assert concrete_interpret(corpus("squareSum.mimp"), {"n": 8}).result == 204 == 8 * 9 * 17 // 6


def test_zero_side(corpus):
    assert concrete_interpret(corpus("tritype.mimp"), {"i": 0, "j": 1, "k": 1}).result == 4


def test_decisions_follow_conditions(corpus):
    r = concrete_interpret(corpus("tritype.mimp"), {"i": 0, "j": 1, "k": 1})
    assert r.decisions[0][1] is True and len(r.decisions) == 1


def test_selection_sort_sorts_in_place(corpus):
    r = concrete_interpret(corpus("selectionSort.mimp"), {"t": [3, 1, 2, 0]})
    assert r.arrays["t"] == [0, 1, 2, 3]


def test_out_of_bounds():
    tp = load("int f(int[] t){ return t[3]; }")
    with pytest.raises(OutOfBounds) as e:
        concrete_interpret(tp, {"t": [1, 2]})
    assert (e.value.index, e.value.length) == (3, 2)


def test_runaway_loop():
    tp = load("int f(int x){ while (true) { x = x + 0; } return x; }")
    with pytest.raises(StepBudgetExceeded):
        concrete_interpret(tp, {"x": 1}, max_steps=1000)


def test_truncating_division_and_zero():
    tp = load("int f(int x, int y){ return x / y; }")
    assert concrete_interpret(tp, {"x": -7, "y": 2}).result == -3
    with pytest.raises(Pruned):
        concrete_interpret(tp, {"x": 1, "y": 0})


def test_callee_precondition_checked():
    tp = load("int g(int x){ int y = h(x); return y; }"
              "/*@ requires x > 0; @*/ int h(int x){ return x; }")
    assert concrete_interpret(tp, {"x": 3}).result == 3
    with pytest.raises(PreconditionViolated):
        concrete_interpret(tp, {"x": 0})


def test_contract_short_circuits(corpus):
    tp = corpus("binarySearch.mimp")
    ens = tp.program.contract.ensures
    # \result == -1 guards the read of tab[\result]
    assert holds(ens, {"x": 5}, {"tab": [1, 2]}, -1)
    assert not holds(ens, {"x": 2}, {"tab": [1, 2]}, -1)
    assert holds(ens, {"x": 2}, {"tab": [1, 2]}, 1)
