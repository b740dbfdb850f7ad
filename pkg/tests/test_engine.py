import math

from fdverify import Counterexample, InstanceParams, ResourceExceeded, Verified, load, verify
from fdverify.harness import replay


def run(src, function=None, **inst):
    tp = load(src, function)
    return tp, verify(tp, InstanceParams(**inst))


def test_tritype_has_ten_paths(corpus):
    v = verify(corpus("tritype.mimp"), InstanceParams())
    assert isinstance(v, Verified) and v.paths == 10


def test_tritype_error_witness(corpus):
    tp = corpus("tritypeKO.mimp")
    v = verify(tp, InstanceParams())
    assert isinstance(v, Counterexample) and v.kind == "postcondition"
    i, j, k = (v.inputs[n] for n in "ijk")
    assert i == j and i + j <= k
    assert v.result == 2
    assert replay(tp, v)
    finals = [e for e in v.entries if e.name == "trityp_3"]
    assert finals and finals[0].value == 2


def test_identity_single_path():
    _, v = run("/*@ ensures \\result == x; @*/ int id(int x){ return x; }")
    assert isinstance(v, Verified) and v.paths == 1


def test_constant_condition_is_forced():
    _, v = run("int f(int x){ if (true) { return 1; } return 0; }")
    assert isinstance(v, Verified) and v.paths == 1


def test_bsearch_needs_no_unwinding_bound(corpus):
    for n in (8, 16):
        v = verify(corpus("binarySearch.mimp"), InstanceParams(lengths={"tab": n}))
        assert isinstance(v, Verified)
        assert v.max_iterations <= int(math.log2(n)) + 1


def test_bsearch_error_witness(corpus):
    tp = corpus("binarySearchKO.mimp")
    v = verify(tp, InstanceParams(lengths={"tab": 8}))
    assert isinstance(v, Counterexample)
    assert v.result == -1 and v.inputs["x"] in v.inputs["tab"]
    assert replay(tp, v)


def test_modular_call_single_path(corpus):
    v = verify(corpus("selectionSort.mimp"), InstanceParams(lengths={"t": 10}))
    assert isinstance(v, Verified) and v.paths == 1


CALLER = """
/*@ requires 0<=l && l<t.length
  @ ensures (l<=\\result) && (\\result<t.length) @*/
int findMin(int[] t, int l) { return l; }
"""


def test_call_at_precondition_boundary():
    src = "/*@ ensures \\result == t.length - 1; @*/ int g(int[] t) { int k = findMin(t, t.length - 1); return k; }" + CALLER
    _, v = run(src, lengths={"t": 5})
    assert isinstance(v, Verified)


def test_call_outside_precondition():
    src = "int g(int[] t) { int k = findMin(t, -1); return k; }" + CALLER
    _, v = run(src, lengths={"t": 5})
    assert isinstance(v, Counterexample) and v.kind == "precondition"


def test_out_of_bounds_read():
    tp, v = run("int f(int[] t, int i){ return t[i]; }", lengths={"t": 3})
    assert isinstance(v, Counterexample) and v.kind == "index"
    assert not 0 <= v.inputs["i"] < 3
    assert replay(tp, v)


def test_guarded_read_is_fine():
    _, v = run("int f(int[] t, int i){ int r = 0; if (0 <= i && i < t.length) { r = t[i]; } return r; }",
               lengths={"t": 3})
    assert isinstance(v, Verified) and v.paths == 2


def test_division_by_zero_is_not_a_path():
    _, v = run("/*@ requires -2 <= x && x <= 2; @*/ int f(int x){ return 12 / x; }")
    assert isinstance(v, Verified) and v.paths == 1


def test_unbounded_loop_reports_budget():
    _, v = run("int f(int x){ while (x > 0) { x = x - 1; } return x; }", max_unwind=5)
    assert isinstance(v, ResourceExceeded) and v.which == "unwind"


def test_loop_within_budget_is_verified():
    _, v = run("/*@ requires 0 <= x && x <= 4; ensures \\result == 0; @*/"
               " int f(int x){ while (x > 0) { x = x - 1; } return x; }", max_unwind=5)
    assert isinstance(v, Verified) and v.paths == 5


def test_node_budget(corpus):
    v = verify(corpus("binarySearch.mimp"), InstanceParams(lengths={"tab": 16}, max_nodes=5))
    assert isinstance(v, ResourceExceeded) and v.which == "nodes"


def test_unsatisfiable_precondition():
    _, v = run("/*@ requires x > 0 && x < 0; ensures \\result == 1; @*/ int f(int x){ return 0; }")
    assert isinstance(v, Verified) and v.paths == 0


def test_findmin_fully_verified(corpus):
    v = verify(corpus("selectionSort.mimp", "findMin"), InstanceParams(lengths={"t": 4}))
    assert isinstance(v, Verified) and v.paths == 15
