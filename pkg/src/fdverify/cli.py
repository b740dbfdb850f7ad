"""Command-line front end: ``verify``, ``bench`` and ``oracle``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from . import harness
from .engine import Counterexample, ResourceExceeded, Verified, verify
from .lang import ast as A
from .lang.parser import ParseError, parse_unit
from .lang.typecheck import TypeCheckError, typecheck
from .trace import format_trace
from .translate import InstanceParams, TranslationError

EXIT_VERIFIED = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_RESOURCE = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 already means ResourceExceeded
    def error(self, message):
        raise UsageError(message)


def _assignment(text: str, what: str) -> tuple:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise UsageError(f"expected NAME=VALUE for {what}, got {text!r}")
    return name.strip(), value.strip()


def parse_len(text: str) -> tuple:
    name, value = _assignment(text, "--len")
    try:
        n = int(value)
    except ValueError:
        raise UsageError(f"--len {text}: length must be an integer") from None
    if n < 0:
        raise UsageError(f"--len {text}: length must be non-negative")
    return name, n


def parse_bound(text: str) -> tuple:
    name, value = _assignment(text, "--bound")
    lo, sep, hi = value.partition("..")
    try:
        if not sep:
            raise ValueError
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise UsageError(f"--bound {text}: expected NAME=LO..HI") from None
    if lo > hi:
        raise UsageError(f"--bound {text}: empty range")
    return name, (lo, hi)


def parse_sizes(text: str) -> list:
    try:
        sizes = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--sizes {text}: expected comma-separated integers") from None
    if not sizes or any(n < 0 for n in sizes):
        raise UsageError(f"--sizes {text}: expected non-negative integers")
    return sizes


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fdverify", description="Bounded verification of annotated programs "
                "by constraint-based symbolic execution.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def instance_flags(sp):
        sp.add_argument("file", help="source file (.mimp)")
        sp.add_argument("--function", help="function to check (default: the first one)")
        sp.add_argument("--len", action="append", default=[], metavar="NAME=N",
                        help="length of an array parameter (repeatable)")
        sp.add_argument("--bound", action="append", default=[], metavar="NAME=LO..HI",
                        help="input domain of a parameter; for arrays it bounds every slot")

    v = sub.add_parser("verify", help="verify one function against its contract")
    instance_flags(v)
    v.add_argument("--max-unwind", type=_positive, metavar="N", help="loop unwinding limit")
    v.add_argument("--budget-nodes", type=_positive, metavar="N", help="search node budget")
    v.add_argument("--budget-ms", type=_positive, metavar="N", help="wall-clock budget")
    v.add_argument("--trace", action="store_true", help="print the counterexample trace")
    v.add_argument("--paths", action="store_true", help="print the number of feasible paths")

    b = sub.add_parser("bench", help="run the embedded corpus")
    b.add_argument("--suite", default="all", help="suite or benchmark name (default: all); "
                   "suites: " + ", ".join(harness.SUITES))
    b.add_argument("--sizes", help="comma-separated sizes overriding the defaults")
    b.add_argument("--format", choices=("text", "tsv"), default="text")
    b.add_argument("--jobs", type=_positive, default=1, help="parallel worker processes")
    b.add_argument("--budget-nodes", type=_positive, metavar="N")
    b.add_argument("--budget-ms", type=_positive, metavar="N")

    o = sub.add_parser("oracle", help="check every input of a small instance concretely")
    instance_flags(o)
    o.add_argument("--cap", type=_positive, default=harness.DEFAULT_CAP,
                   help="largest input space to enumerate (default: %(default)s)")
    return p


def _load(path: str, function: Optional[str]):
    try:
        source = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror or e}") from None
    try:
        unit = parse_unit(source)
    except ParseError as e:
        raise UsageError(f"{path}:{e.line}:{e.col}: {e.message}") from None
    try:
        prog = unit.get(function) if function else unit.main
    except KeyError:
        names = ", ".join(f.name for f in unit.functions)
        raise UsageError(f"{path}: no function {function!r} (have: {names})") from None
    try:
        return typecheck(prog, unit)
    except TypeCheckError as e:
        raise UsageError("\n".join(f"{path}:{i}" if i.pos else f"{path}: {i}"
                                   for i in e.issues)) from None


def _instance(tp, args, **budgets) -> InstanceParams:
    lengths = dict(parse_len(t) for t in args.len)
    bounds = dict(parse_bound(t) for t in args.bound)
    params = {q.name: q for q in tp.program.params}
    for name in list(lengths) + list(bounds):
        if name not in params:
            raise UsageError(f"{tp.name} has no parameter {name!r}")
    for name in lengths:
        if params[name].type != A.INT_ARRAY:
            raise UsageError(f"--len {name}: {name} is not an array parameter")
    missing = [a for a in tp.program.array_params if a not in lengths]
    if missing:
        raise UsageError("missing length for array parameter " + ", ".join(missing)
                         + " (use " + " ".join(f"--len {a}=N" for a in missing) + ")")
    return InstanceParams(lengths=lengths, bounds=bounds, **budgets)


def cmd_verify(args, out) -> int:
    tp = _load(args.file, args.function)
    inst = _instance(tp, args, max_unwind=args.max_unwind, max_nodes=args.budget_nodes,
                     time_limit_ms=args.budget_ms)
    try:
        v = verify(tp, inst)
    except TranslationError as e:
        raise UsageError(f"{args.file}: {e}") from None
    if isinstance(v, Verified):
        print(f"{tp.name}: Verified", file=out)
        if args.paths:
            print(f"feasible paths: {v.paths}", file=out)
        return EXIT_VERIFIED
    if isinstance(v, Counterexample):
        print(f"{tp.name}: Counterexample ({v.kind})", file=out)
        if v.detail:
            print(v.detail, file=out)
        shown = ", ".join(f"{k}={val}" for k, val in v.inputs.items())
        print(f"input: {shown}", file=out)
        if v.result is not None:
            print(f"result: {v.result}", file=out)
        if args.trace:
            print(format_trace(v), file=out)
        return EXIT_COUNTEREXAMPLE
    assert isinstance(v, ResourceExceeded)
    print(f"{tp.name}: ResourceExceeded ({v.which})", file=out)
    if args.paths:
        print(f"feasible paths: {v.paths}", file=out)
    return EXIT_RESOURCE


def cmd_bench(args, out) -> int:
    try:
        specs = harness.suite(args.suite)
    except KeyError:
        raise UsageError(f"unknown suite {args.suite!r}") from None
    sizes = parse_sizes(args.sizes) if args.sizes else None
    budget = None
    if args.budget_nodes or args.budget_ms:
        budget = InstanceParams(max_nodes=args.budget_nodes, time_limit_ms=args.budget_ms)
    report = harness.bench(specs, sizes, budget, jobs=args.jobs)
    out.write(report.to_tsv() if args.format == "tsv" else report.to_text())
    if not report.ok:
        for r in report.mismatches:
            print(f"mismatch: {r.benchmark} length {r.length}: got {r.verdict}, "
                  f"expected {r.expected}", file=sys.stderr)
        return 1
    return 0


def cmd_oracle(args, out) -> int:
    tp = _load(args.file, args.function)
    inst = _instance(tp, args)
    try:
        res = harness.oracle(tp, inst, cap=args.cap)
    except harness.MissingDomain as e:
        raise UsageError(f"{e} (use --bound NAME=LO..HI)") from None
    except harness.CapExceeded as e:
        print(f"{tp.name}: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    if res.verdict == harness.VERIFIED:
        print(f"{tp.name}: no violation in {res.checked} inputs", file=out)
        return EXIT_VERIFIED
    shown = ", ".join(f"{k}={val}" for k, val in res.witness.items())
    print(f"{tp.name}: violation ({res.kind}) at {shown}", file=out)
    return EXIT_COUNTEREXAMPLE


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                            format="%(levelname)s %(name)s: %(message)s")
        handler = {"verify": cmd_verify, "bench": cmd_bench, "oracle": cmd_oracle}[args.command]
        return handler(args, out)
    except UsageError as e:
        print(f"fdverify: {e}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())
