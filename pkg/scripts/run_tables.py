#!/usr/bin/env python3
"""Regenerate the benchmark tables (verdicts, path and node counts, measured
wall time) for the embedded corpus.

    python3 scripts/run_tables.py [--out DIR] [--jobs N] [--budget-ms N]

Each table is printed and, with --out, also written as TSV.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from fdverify import harness
from fdverify.translate import InstanceParams

TABLES = [
    ("tritype", ["tritype"], None),
    ("tritype-error", ["tritypeKO"], None),
    ("binary-search", ["binarySearch"], [8, 16, 32, 64, 128]),
    ("binary-search-error", ["binarySearchKO"], [8, 16, 32, 64, 128]),
    ("square-sum", ["squareSum"], [8, 16, 32, 64]),
    ("bubble-sort", ["bubbleSortWithInit"], [8, 16, 32, 64]),
    ("square-sum-array", ["squareSumArray"], [4, 5, 6]),
    ("selection-sort", ["selectionSort", "findMin"], None),
]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, help="directory for one TSV file per table")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--budget-ms", type=int, default=120_000,
                    help="per-run wall-clock budget (default: %(default)s)")
    args = ap.parse_args(argv)
    budget = InstanceParams(time_limit_ms=args.budget_ms)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
    ok = True
    for title, names, sizes in TABLES:
        specs = [harness.benchmark(n) for n in names]
        report = harness.bench(specs, sizes, budget, jobs=args.jobs)
        print(f"== {title}")
        print(report.to_text())
        if args.out:
            (args.out / f"{title}.tsv").write_text(report.to_tsv())
        ok = ok and report.ok
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
