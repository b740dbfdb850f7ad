"""Embedded benchmark corpus, bench runner and the brute-force oracle."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Optional

from .engine import Counterexample, ResourceExceeded, Verified, verify
from .interp import InterpError, OutOfBounds, PreconditionViolated, Pruned, StepBudgetExceeded
from .interp import concrete_interpret, holds
from .lang import ast as A
from .lang.parser import parse_unit
from .lang.typecheck import TypedProgram, typecheck
from .translate import InstanceParams

VERIFIED = "Verified"
COUNTEREXAMPLE = "Counterexample"
RESOURCE = "ResourceExceeded"


def verdict_name(v) -> str:
    if isinstance(v, Verified):
        return VERIFIED
    if isinstance(v, Counterexample):
        return COUNTEREXAMPLE
    if isinstance(v, ResourceExceeded):
        return RESOURCE
    raise TypeError(type(v).__name__)


# --- corpus ------------------------------------------------------------------------

def corpus_dir():
    return resources.files("fdverify") / "corpus"


def corpus_source(file: str) -> str:
    return (corpus_dir() / file).read_text()


def load_source(source: str, function: Optional[str] = None) -> TypedProgram:
    unit = parse_unit(source)
    return typecheck(unit.get(function) if function else unit.main, unit)


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    file: str
    function: Optional[str]
    sizes: tuple                 # default instance sizes; () for size-free programs
    expected: str
    sized: str = "length"        # "length": array lengths, "bound": n <= size, "" : none

    def instance(self, size: Optional[int], tp: TypedProgram) -> InstanceParams:
        if size is None or not self.sized:
            return InstanceParams()
        if self.sized == "bound":
            return InstanceParams(bounds={p.name: (0, size) for p in tp.program.params
                                          if p.type == A.INT})
        return InstanceParams(lengths={a: size for a in tp.program.array_params})

    def load(self) -> TypedProgram:
        return load_source(corpus_source(self.file), self.function)


REGISTRY = (
    BenchmarkSpec("tritype", "tritype.mimp", None, (), VERIFIED, ""),
    BenchmarkSpec("tritypeKO", "tritypeKO.mimp", None, (), COUNTEREXAMPLE, ""),
    BenchmarkSpec("binarySearch", "binarySearch.mimp", None, (8, 16), VERIFIED),
    BenchmarkSpec("binarySearchKO", "binarySearchKO.mimp", None, (8, 16, 32, 64, 128), COUNTEREXAMPLE),
    BenchmarkSpec("bubbleSortWithInit", "bubbleSort.mimp", None, (8, 16, 32), VERIFIED),
    BenchmarkSpec("squareSum", "squareSum.mimp", None, (8, 16), VERIFIED, "bound"),
    BenchmarkSpec("squareSumArray", "squareSumArray.mimp", None, (4, 5, 6), VERIFIED),
    BenchmarkSpec("selectionSort", "selectionSort.mimp", "selectionSort", (40,), VERIFIED),
    BenchmarkSpec("findMin", "selectionSort.mimp", "findMin", (6,), VERIFIED),
)

SUITES = {
    "tritype": ("tritype", "tritypeKO"),
    "bsearch": ("binarySearch",),
    "bsearchKO": ("binarySearchKO",),
    "bubble": ("bubbleSortWithInit",),
    "squareSum": ("squareSum",),
    "squareSumArray": ("squareSumArray",),
    "selectionSort": ("selectionSort", "findMin"),
    "all": tuple(b.name for b in REGISTRY),
}


def benchmark(name: str) -> BenchmarkSpec:
    for b in REGISTRY:
        if b.name == name:
            return b
    raise KeyError(name)


def suite(name: str) -> list:
    if name in SUITES:
        return [benchmark(n) for n in SUITES[name]]
    return [benchmark(name)]


# --- bench ------------------------------------------------------------------------

@dataclass(frozen=True)
class Row:
    benchmark: str
    length: str
    verdict: str
    paths: Optional[int]
    nodes: int
    ms: float
    expected: str

    @property
    def ok(self) -> bool:
        if self.verdict == self.expected:
            return True
        # a budget-limited run is honest, only a wrong verdict is a mismatch
        return self.verdict == RESOURCE and self.expected == VERIFIED

    def cells(self) -> list:
        return [self.benchmark, self.length, self.verdict,
                "-" if self.paths is None else str(self.paths), str(self.nodes), f"{self.ms:.1f}"]


COLUMNS = ("benchmark", "length", "verdict", "paths", "nodes", "ms")


@dataclass
class Report:
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def mismatches(self) -> list:
        return [r for r in self.rows if not r.ok]

    def to_tsv(self) -> str:
        lines = ["\t".join(COLUMNS)]
        lines.extend("\t".join(r.cells()) for r in self.rows)
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        table = [list(COLUMNS)] + [r.cells() for r in self.rows]
        widths = [max(len(row[i]) for row in table) for i in range(len(COLUMNS))]
        out = []
        for k, row in enumerate(table):
            out.append("  ".join(c.ljust(w) if i < 3 else c.rjust(w)
                                 for i, (c, w) in enumerate(zip(row, widths))).rstrip())
            if k == 0:
                out.append("  ".join("-" * w for w in widths))
        return "\n".join(out) + "\n"


def run_one(spec: BenchmarkSpec, size: Optional[int], budget: Optional[InstanceParams] = None) -> Row:
    tp = spec.load()
    inst = spec.instance(size, tp)
    if budget is not None:
        inst = replace(inst, max_unwind=budget.max_unwind, max_nodes=budget.max_nodes,
                       time_limit_ms=budget.time_limit_ms)
    t0 = time.perf_counter()
    v = verify(tp, inst)
    ms = (time.perf_counter() - t0) * 1000.0
    paths = getattr(v, "paths", None) if not isinstance(v, Counterexample) else None
    return Row(spec.name, "-" if size is None or not spec.sized else str(size),
               verdict_name(v), paths, v.nodes if hasattr(v, "nodes") else 0, ms, spec.expected)


def _job(args):
    name, size, budget = args
    return run_one(benchmark(name), size, budget)


def bench(specs, sizes: Optional[list] = None, budget: Optional[InstanceParams] = None,
          jobs: int = 1) -> Report:
    """Run every (benchmark, size); ``sizes`` overrides each benchmark's defaults."""
    work = []
    for spec in specs:
        chosen = spec.sizes if sizes is None else sizes
        if not spec.sized or not chosen:
            chosen = (None,)
        work.extend((spec.name, n, budget) for n in chosen)
    if jobs > 1 and len(work) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_job, work))
    else:
        rows = [_job(w) for w in work]
    return Report(rows)


# --- oracle -----------------------------------------------------------------------

DEFAULT_CAP = 10 ** 7


class CapExceeded(Exception):
    def __init__(self, size: int, cap: int):
        super().__init__(f"input space has {size} points, more than the cap of {cap}")
        self.size, self.cap = size, cap


class MissingDomain(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    verdict: str                    # Verified or Counterexample
    witness: Optional[dict] = None
    kind: str = ""                  # postcondition, index or precondition
    checked: int = 0                # inputs satisfying requires that were run
    skipped: int = 0                # pruned (division by zero, overflow) or over budget


def input_space(tp: TypedProgram, inst: InstanceParams) -> tuple:
    """``(names, per-parameter value lists, size)`` for exhaustive enumeration."""
    names, domains = [], []
    size = 1
    for p in tp.program.params:
        if p.type == A.BOOL:
            lo, hi = inst.bounds.get(p.name, (0, 1))
            vals = [bool(v) for v in range(max(lo, 0), min(hi, 1) + 1)]
        else:
            if p.name not in inst.bounds:
                raise MissingDomain(f"no bound given for {p.name}")
            lo, hi = inst.bounds[p.name]
            vals = list(range(lo, hi + 1))
        if p.type == A.INT_ARRAY:
            if p.name not in inst.lengths:
                raise MissingDomain(f"no length given for {p.name}")
            n = inst.lengths[p.name]
            size *= len(vals) ** n
            vals = ("array", vals, n)
        else:
            size *= len(vals)
        names.append(p.name)
        domains.append(vals)
    return names, domains, size


def _points(domains):
    expanded = []
    for d in domains:
        if isinstance(d, tuple):
            _, vals, n = d
            expanded.append([list(t) for t in itertools.product(vals, repeat=n)])
        else:
            expanded.append(d)
    return itertools.product(*expanded)


def oracle(tp: TypedProgram, inst: InstanceParams, cap: int = DEFAULT_CAP,
           max_steps: int = 100_000) -> OracleResult:
    """Run every input in the instance's domains and check requires => ensures."""
    names, domains, size = input_space(tp, inst)
    if size > cap:
        raise CapExceeded(size, cap)
    prog = tp.program
    checked = skipped = 0
    for point in _points(domains):
        inputs = dict(zip(names, point))
        scalars = {k: v for k, v in inputs.items() if not isinstance(v, list)}
        arrays = {k: list(v) for k, v in inputs.items() if isinstance(v, list)}
        try:
            if not holds(prog.contract.requires, dict(scalars), arrays):
                continue
        except InterpError:
            continue
        try:
            run = concrete_interpret(tp, inputs, max_steps)
        except OutOfBounds:
            return OracleResult(COUNTEREXAMPLE, inputs, "index", checked + 1, skipped)
        except PreconditionViolated:
            return OracleResult(COUNTEREXAMPLE, inputs, "precondition", checked + 1, skipped)
        except (Pruned, StepBudgetExceeded):
            skipped += 1
            continue
        checked += 1
        try:
            ok = holds(prog.contract.ensures, dict(scalars), run.arrays, run.result)
        except InterpError:
            ok = False
        if not ok:
            return OracleResult(COUNTEREXAMPLE, inputs, "postcondition", checked, skipped)
    return OracleResult(VERIFIED, None, "", checked, skipped)


def replay(tp: TypedProgram, cex: Counterexample) -> bool:
    """True iff concretely re-running the witness really fails: it goes out of
    bounds, breaks a callee precondition, or violates the ensures clause."""
    prog = tp.program
    inputs = dict(cex.inputs)
    scalars = {k: v for k, v in inputs.items() if not isinstance(v, (list, tuple))}
    arrays = {k: list(v) for k, v in inputs.items() if isinstance(v, (list, tuple))}
    if not holds(prog.contract.requires, dict(scalars), arrays):
        return False
    try:
        run = concrete_interpret(tp, {**scalars, **arrays})
    except (OutOfBounds, PreconditionViolated):
        return True
    except (Pruned, StepBudgetExceeded):
        return False
    return not holds(prog.contract.ensures, dict(scalars), run.arrays, run.result)
