import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from fdverify import Counterexample, InstanceParams, Verified, verify
from fdverify.harness import (
    COUNTEREXAMPLE, REGISTRY, RESOURCE, VERIFIED, CapExceeded, MissingDomain, Report, Row,
    bench, benchmark, corpus_source, input_space, oracle, replay, run_one, suite,
)
from fdverify.lang.parser import ParseError
from fdverify.lang.typecheck import TypeCheckError

from equiv import TARGETS, compare, load_target, mutate, mutation_sites


@pytest.mark.parametrize("file,function,rng", TARGETS, ids=[t[0] for t in TARGETS])
@pytest.mark.parametrize("length", [0, 1, 2, 3, 4])
def test_engine_agrees_with_oracle(file, function, rng, length):
    tp = load_target(file, function)
    if not tp.program.array_params and length:
        pytest.skip("no array parameter")
    v, ref = compare(tp, length, rng)
    assert not ref.skipped
    assert isinstance(v, (Verified, Counterexample))


MUTANTS = [(f, fn, rng, site) for f, fn, rng in TARGETS
           for site in mutation_sites(corpus_source(f), fn)]


def _load_mutant(file, function, source):
    try:
        return load_target(file, function, source)
    except (ParseError, TypeCheckError):
        return None


@pytest.mark.parametrize("file,function,rng,site", MUTANTS,
                         ids=[f"{m[0]}@{m[3][0]}{m[3][1]}" for m in MUTANTS])
def test_single_mutant_agrees_with_oracle(file, function, rng, site):
    tp = _load_mutant(file, function, mutate(corpus_source(file), site))
    if tp is None:
        pytest.skip("mutant does not compile")
    compare(tp, 3, rng, max_unwind=12)


def test_mutants_are_mostly_caught():
    caught = 0
    for file, function, rng, site in MUTANTS:
        if file.endswith("KO.mimp"):
            continue
        tp = _load_mutant(file, function, mutate(corpus_source(file), site))
        if tp is not None:
            v, _ = compare(tp, 3, rng, max_unwind=12)
            caught += isinstance(v, Counterexample)
    assert caught >= 30


@st.composite
def double_mutants(draw):
    file, function, rng = draw(st.sampled_from([t for t in TARGETS if not t[0].startswith("tritype")]))
    src = corpus_source(file)
    sites = mutation_sites(src, function)
    a, b = draw(st.lists(st.sampled_from(sites), min_size=2, max_size=2, unique=True))
    # apply the later site first so earlier offsets stay valid
    for site in sorted((a, b), reverse=True):
        src = mutate(src, site)
    return file, function, rng, src, draw(st.integers(0, 3))


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(double_mutants())
def test_double_mutants_agree_with_oracle(m):
    file, function, rng, src, length = m
    tp = _load_mutant(file, function, src)
    assume(tp is not None)
    compare(tp, length, rng, max_unwind=12)


def test_replay_rejects_forged_witness(corpus):
    tp = corpus("tritypeKO.mimp")
    v = verify(tp, InstanceParams())
    assert replay(tp, v)
    forged = Counterexample(**{**v.__dict__, "inputs": {"i": 3, "j": 4, "k": 5}})
    assert not replay(tp, forged)


def test_oracle_witness_violates_contract(corpus):
    tp = corpus("tritypeKO.mimp")
    res = oracle(tp, InstanceParams(bounds={n: (0, 4) for n in "ijk"}))
    assert res.verdict == COUNTEREXAMPLE and res.kind == "postcondition"
    i, j, k = (res.witness[n] for n in "ijk")
    assert i == j and i + j <= k or j == k and j + k <= i or i == k and i + k <= j


def test_input_space_size(corpus):
    tp = corpus("binarySearch.mimp")
    _, _, size = input_space(tp, InstanceParams(lengths={"tab": 2}, bounds={"tab": (0, 2), "x": (0, 2)}))
    assert size == 27


def test_oracle_cap_and_domains(corpus):
    tp = corpus("binarySearch.mimp")
    with pytest.raises(CapExceeded):
        oracle(tp, InstanceParams(lengths={"tab": 8}, bounds={"tab": (0, 9), "x": (0, 9)}), cap=1000)
    with pytest.raises(MissingDomain):
        oracle(tp, InstanceParams(lengths={"tab": 2}, bounds={"x": (0, 1)}))


def test_registry_names_are_unique():
    names = [b.name for b in REGISTRY]
    assert len(names) == len(set(names))
    assert {b.name for b in suite("all")} == set(names)
    with pytest.raises(KeyError):
        benchmark("nope")


def test_run_one_square_sum_bound():
    row = run_one(benchmark("squareSum"), 8)
    assert row.verdict == VERIFIED and row.length == "8" and row.ok


def test_bench_report_rendering():
    rep = bench(suite("tritype"))
    assert rep.ok and [r.verdict for r in rep.rows] == [VERIFIED, COUNTEREXAMPLE]
    tsv = rep.to_tsv().splitlines()
    assert tsv[0].split("\t") == ["benchmark", "length", "verdict", "paths", "nodes", "ms"]
    assert tsv[1].split("\t")[3] == "10"
    text = rep.to_text().splitlines()
    assert text[1].startswith("---") and len(text) == 4


def test_row_acceptance_rules():
    r = Row("x", "8", RESOURCE, None, 5, 1.0, VERIFIED)
    assert r.ok
    assert not Row("x", "8", VERIFIED, 3, 5, 1.0, COUNTEREXAMPLE).ok
    assert not Report([Row("x", "8", COUNTEREXAMPLE, None, 5, 1.0, VERIFIED)]).ok


def test_verdicts_are_deterministic(corpus):
    tp = corpus("binarySearchKO.mimp")
    inst = InstanceParams(lengths={"tab": 16})
    a, b = verify(tp, inst), verify(tp, inst)
    assert a.inputs == b.inputs and a.entries == b.entries and a.nodes == b.nodes


def test_parallel_bench_matches_serial():
    specs = suite("selectionSort")
    serial = bench(specs, [4])
    parallel = bench(specs, [4], jobs=2)
    key = [(r.benchmark, r.verdict, r.paths, r.nodes) for r in serial.rows]
    assert key == [(r.benchmark, r.verdict, r.paths, r.nodes) for r in parallel.rows]
