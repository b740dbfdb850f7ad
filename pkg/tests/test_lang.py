import pytest

from fdverify.lang import ast as A
from fdverify.lang import pretty
from fdverify.lang.parser import ParseError, parse_program, parse_unit
from fdverify.lang.typecheck import TypeCheckError, desugar, typecheck, typecheck_unit

from conftest import CORPUS_FILES, corpus_text


def _depth(s):
    if isinstance(s, A.If):
        return 1 + max(_depth(s.then), _depth(s.orelse) if s.orelse else 0)
    if isinstance(s, A.Block):
        return max((_depth(x) for x in s.stmts), default=0)
    if isinstance(s, A.While):
        return _depth(s.body)
    return 0


def test_tritype_shape():
    p = parse_program(corpus_text("tritype.mimp"))
    assert p.name == "tritype"
    assert [(q.name, q.type) for q in p.params] == [("i", "int"), ("j", "int"), ("k", "int")]
    assert p.result_type == "int"
    assert _depth(p.body) >= 4
    first = next(s for s in p.body.stmts if isinstance(s, A.If))
    assert isinstance(first.cond, A.Binary) and first.cond.op == "||"


def test_identity_function():
    p = parse_program("/*@ ensures \\result == x; @*/ int f(int x){ return x; }")
    assert p.body.stmts == (A.Return(A.VarRef("x")),)
    assert p.contract.ensures == A.Atom(A.Binary("==", A.ResultRef(), A.VarRef("x")))


def test_undeclared_identifier():
    p = parse_program("int f(int x){ return y; }")
    with pytest.raises(TypeCheckError) as e:
        typecheck(p)
    assert "y" in str(e.value)


def test_parse_error_has_position_and_expected_tokens():
    with pytest.raises(ParseError) as e:
        parse_program("int f(int x){\n  return x\n}")
    err = e.value
    assert (err.line, err.col) == (3, 1)
    assert "';'" in err.expected


def test_ensures_must_be_boolean():
    with pytest.raises(TypeCheckError):
        typecheck(parse_program("/*@ ensures \\result + 1; @*/ int f(int x){ return x; }"))


def test_result_not_allowed_in_requires():
    with pytest.raises(TypeCheckError) as e:
        typecheck(parse_program("/*@ requires \\result == 0; @*/ int f(int x){ return x; }"))
    assert "result" in str(e.value).lower()


def test_boolean_used_arithmetically():
    with pytest.raises(TypeCheckError):
        typecheck(parse_program("int f(int x){ return (x > 0) + 1; }"))


def test_array_used_as_scalar():
    with pytest.raises(TypeCheckError):
        typecheck(parse_program("int f(int[] t){ return t + 1; }"))


def test_missing_return():
    with pytest.raises(TypeCheckError):
        typecheck(parse_program("int f(int x){ if (x > 0) { return 1; } }"))


def test_recursion_rejected():
    unit = parse_unit("int f(int x){ int y = f(x); return y; }")
    with pytest.raises(TypeCheckError):
        typecheck(unit.main, unit)


def test_tritype_local_types():
    tp = typecheck(parse_program(corpus_text("tritype.mimp")))
    assert tp.var_types["trityp"] == "int"


def test_for_desugars_to_while():
    src = corpus_text("selectionSort.mimp")
    unit = parse_unit(src)
    tp = typecheck(unit.main, unit)
    loop_block = tp.program.body.stmts[0]
    assert isinstance(loop_block, A.Block)
    decl, loop = loop_block.stmts
    assert decl == A.Decl("i", "int", A.IntLit(0))
    assert isinstance(loop, A.While)
    assert loop.cond == A.Binary("<", A.VarRef("i"), A.LengthOf("t"))
    assert loop.body.stmts[-1] == A.Assign("i", A.Binary("+", A.VarRef("i"), A.IntLit(1)))


def test_program_without_for_is_unchanged():
    p = parse_program(corpus_text("tritype.mimp"))
    assert typecheck(p).program == p


def test_nested_for_matches_hand_desugared_while():
    with_for = """
    void sort(int[] tab) {
      for (int i = 0; i < tab.length - 1; i++) {
        for (int j = 0; j < tab.length - i - 1; j++) {
          if (tab[j] > tab[j+1]) { int aux = tab[j]; tab[j] = tab[j+1]; tab[j+1] = aux; }
        }
      }
    }"""
    by_hand = """
    void sort(int[] tab) {
      int i = 0;
      while (i < tab.length - 1) {
        int j = 0;
        while (j < tab.length - i - 1) {
          if (tab[j] > tab[j+1]) { int aux = tab[j]; tab[j] = tab[j+1]; tab[j+1] = aux; }
          j = j + 1;
        }
        i = i + 1;
      }
    }"""
    a = typecheck(parse_program(with_for)).program
    b = parse_program(by_hand)
    assert _flat(a.body) == _flat(b.body)


def _flat(s):
    """Statement list with nested blocks spliced in (scoping aside)."""
    if isinstance(s, A.Block):
        out = []
        for x in s.stmts:
            out.extend(_flat(x))
        return out
    if isinstance(s, A.While):
        return [A.While(s.cond, A.Block(tuple(_flat(s.body))))]
    if isinstance(s, A.If):
        orelse = None if s.orelse is None else A.Block(tuple(_flat(s.orelse)))
        return [A.If(s.cond, A.Block(tuple(_flat(s.then))), orelse)]
    return [s]


def test_desugar_is_idempotent():
    unit = parse_unit(corpus_text("selectionSort.mimp"))
    tp = typecheck(unit.main, unit)
    assert desugar(tp).program == tp.program


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_corpus_round_trip(name):
    unit = parse_unit(corpus_text(name))
    again = parse_unit(pretty.unit(unit))
    assert again == unit


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_corpus_typechecks(name):
    checked = typecheck_unit(parse_unit(corpus_text(name)))
    assert checked


def test_desugar_keeps_declared_names():
    unit = parse_unit(corpus_text("selectionSort.mimp"))

    def names(s, acc):
        if isinstance(s, A.Decl):
            acc.add(s.name)
        for f in ("stmts",):
            for x in getattr(s, f, ()):
                names(x, acc)
        for f in ("then", "orelse", "body", "init", "step"):
            x = getattr(s, f, None)
            if isinstance(x, (A.Block, A.If, A.While, A.For, A.Decl, A.Assign)):
                names(x, acc)
        return acc

    for p in unit.functions:
        before = names(p.body, set())
        after = names(typecheck(p, unit).program.body, set())
        assert after == before
