from fdverify import Counterexample, InstanceParams, load, verify
from fdverify.engine import TraceEntry
from fdverify.trace import HEADER, format_entry, format_trace, parse_line

from conftest import CORPUS_FILES


def test_fixed_entry():
    e = TraceEntry("trityp", -2147483647, 2147483646, 2, None, None)
    line = format_entry(e).replace("trityp", "trityp_3", 1)
    m = parse_line(line)
    assert line == "trityp_3[-2147483647:2147483646] : 2"
    assert m and m["ident"] == "trityp" and m["version"] == "3" and m["value"] == "2"


def test_open_entry_with_slot():
    e = TraceEntry("tab_0", -2147483647, 2147483646, None, (0, 5), 2)
    line = format_entry(e)
    assert line == "tab_0[2][-2147483647:2147483646] : [0..5]"
    m = parse_line(line)
    assert m["slot"] == "2" and (m["lo2"], m["hi2"]) == ("0", "5")


def test_rejects_malformed_lines():
    for bad in ("trityp[0:1] : 2", "trityp_1[0:1]: 2", "trityp_1[0:1] : [1..]", "x_1 : 3"):
        assert parse_line(bad) is None


def test_tritype_error_trace_lines(corpus):
    v = verify(corpus("tritypeKO.mimp"), InstanceParams())
    lines = format_trace(v).splitlines()
    assert lines[0] == HEADER
    assert "trityp_3[-2147483647:2147483646] : 2" in lines
    assert all(parse_line(x) for x in lines[1:])


def test_every_corpus_counterexample_parses(corpus):
    tried = 0
    for name in CORPUS_FILES:
        tp = corpus(name)
        lengths = {a: 4 for a in tp.program.array_params}
        v = verify(tp, InstanceParams(lengths=lengths))
        if isinstance(v, Counterexample):
            tried += 1
            assert all(parse_line(x) for x in format_trace(v).splitlines()[1:])
    assert tried == 2


def test_array_slots_in_trace():
    tp = load("/*@ ensures \\result != 3; @*/ int f(int[] t){ return t[1]; }")
    v = verify(tp, InstanceParams(lengths={"t": 2}, bounds={"t": (0, 5)}))
    lines = format_trace(v).splitlines()
    assert any(x.startswith("t_0[1][0:5] : 3") for x in lines)
