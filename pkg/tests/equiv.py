"""Shared helpers: compare symbolic verdicts with exhaustive concrete runs."""

import re

from fdverify import Counterexample, InstanceParams, ResourceExceeded, Verified, load, verify
from fdverify.harness import COUNTEREXAMPLE, VERIFIED, corpus_source, oracle, replay

# (file, function, value range for every int input or slot)
TARGETS = [
    ("tritype.mimp", None, (0, 4)),
    ("tritypeKO.mimp", None, (0, 4)),
    ("binarySearch.mimp", None, (0, 3)),
    ("binarySearchKO.mimp", None, (0, 3)),
    ("bubbleSort.mimp", None, (0, 3)),
    ("squareSum.mimp", None, (0, 6)),
    ("squareSumArray.mimp", None, (0, 3)),
    ("selectionSort.mimp", "findMin", (0, 3)),
]


def instance(tp, length, rng, **extra):
    bounds = {p.name: rng for p in tp.program.params if p.type != "boolean"}
    lengths = {a: length for a in tp.program.array_params}
    return InstanceParams(lengths=lengths, bounds=bounds, **extra)


def compare(tp, length, rng, max_unwind=None, time_limit_ms=20_000):
    """Return ``(engine verdict, oracle result)``. Raises AssertionError on a
    disagreement that cannot be blamed on budgets."""
    inst = instance(tp, length, rng, max_unwind=max_unwind, time_limit_ms=time_limit_ms)
    v = verify(tp, inst)
    ref = oracle(tp, instance(tp, length, rng), max_steps=5_000)
    if isinstance(v, ResourceExceeded) or ref.skipped:
        return v, ref
    if isinstance(v, Verified):
        assert ref.verdict == VERIFIED, f"engine verified, oracle found {ref.witness}"
    else:
        assert isinstance(v, Counterexample)
        assert replay(tp, v), f"spurious witness {v.inputs}"
        assert ref.verdict == COUNTEREXAMPLE
        for name, (lo, hi) in inst.bounds.items():
            got = v.inputs[name]
            for x in got if isinstance(got, (list, tuple)) else [got]:
                assert lo <= x <= hi
    return v, ref


# operator swaps applied to one occurrence inside a function body
SWAPS = [("<=", "<"), ("<", "<="), (">=", ">"), (">", ">="), ("==", "!="), ("!=", "=="),
         ("+ 1", "- 1"), ("+1", "-1"), ("- 1", "+ 1"), ("-1", "+1"), ("&&", "||"), ("||", "&&")]
_SWAP_RE = re.compile("|".join(re.escape(a) for a, _ in sorted(SWAPS, key=lambda s: -len(s[0]))))


def body_span(src, function):
    """Character span of the body of ``function`` (or of the first function)."""
    pattern = r"\b%s\s*\(" % (re.escape(function) if function else r"\w+")
    m = None
    for cand in re.finditer(pattern, src):
        # skip contract text
        if src.rfind("*/", 0, cand.start()) >= src.rfind("/*", 0, cand.start()):
            m = cand
            break
    start = src.index("{", m.end())
    depth = 0
    for i in range(start, len(src)):
        depth += {"{": 1, "}": -1}.get(src[i], 0)
        if depth == 0:
            return start, i + 1
    return start, len(src)


def mutation_sites(src, function):
    lo, hi = body_span(src, function)
    sites = []
    for m in _SWAP_RE.finditer(src, lo, hi):
        if src.rfind("//", src.rfind("\n", 0, m.start()), m.start()) != -1:
            continue
        sites.append((m.start(), m.group()))
    return sites


def mutate(src, site):
    pos, op = site
    new = dict(SWAPS)[op]
    return src[:pos] + new + src[pos + len(op):]


def load_target(file, function, source=None):
    return load(source if source is not None else corpus_source(file), function)
