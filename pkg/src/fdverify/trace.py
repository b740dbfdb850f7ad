"""Counterexample trace printing and parsing."""
from __future__ import annotations

import re

HEADER = "Counter-example found"

LINE_RE = re.compile(
    r"^(?P<ident>[A-Za-z_][A-Za-z0-9_]*)_(?P<version>\d+)"
    r"(?:\[(?P<slot>\d+)\])?"
    r"\[(?P<lo>-?\d+):(?P<hi>-?\d+)\] : "
    r"(?:(?P<value>-?\d+)|\[(?P<lo2>-?\d+)\.\.(?P<hi2>-?\d+)\])$"
)


def format_entry(e) -> str:
    slot = "" if e.slot is None else f"[{e.slot}]"
    shown = str(e.value) if e.value is not None else f"[{e.span[0]}..{e.span[1]}]"
    return f"{e.name}{slot}[{e.lo}:{e.hi}] : {shown}"


def format_trace(cex) -> str:
    lines = [HEADER]
    lines.extend(format_entry(e) for e in cex.entries)
    return "\n".join(lines)


def parse_line(line: str):
    """Match one trace line; returns the regex match or None."""
    return LINE_RE.match(line)
