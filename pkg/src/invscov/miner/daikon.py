"""Daikon decls/dtrace text formats, one program point per basic block.

Each block is presented to Daikon as if it were a function: an ``:::ENTER``
and an ``:::EXIT0`` point carrying the same variables, both logged at the
end of the block.
"""

from __future__ import annotations

from typing import Iterable, Iterator, TextIO

from ..analysis.comparability import DAIKON_EPSILON, ComparabilityMap
from ..ir.model import Program, ppt_name
from .model import BlockStateRecord

ENTER = ":::ENTER"
EXIT = ":::EXIT0"


def daikon_var(name: str) -> str:
    # Daikon would read a bare number as a literal.
    return f"_{name}" if name.isdigit() else name


def ir_var(name: str) -> str:
    return name[1:] if name.startswith("_") and name[1:].isdigit() else name


def write_decls(program: Program, dump: dict, comp: dict) -> str:
    """Declarations for every block; ``dump``/``comp`` are keyed by function name."""
    out = ["decl-version 2.0", "var-comparability implicit", "input-language C/C++", ""]
    for f in program.functions:
        for b in f.blocks:
            names = dump[f.name][b.id]
            for suffix, kind in ((ENTER, "enter"), (EXIT, "subexit")):
                out.append(f"ppt {ppt_name(f.name, b.label)}{suffix}")
                out.append(f"ppt-type {kind}")
                for n in names:
                    ty = f.value_types[n]
                    out.append(f"variable {daikon_var(n)}")
                    out.append("  var-kind variable")
                    out.append(f"  dec-type {ty.c_name()}")
                    out.append("  rep-type int")
                    out.append(f"  comparability {comp[f.name].daikon_id(n)}")
                out.append("")
    return "\n".join(out)


def format_record(rec: BlockStateRecord) -> str:
    lines = []
    for suffix in (ENTER, EXIT):
        lines.append(f"{rec.ppt}{suffix}")
        lines.append("this_invocation_nonce")
        lines.append(str(rec.nonce))
        for name, value in rec.observations:
            lines.extend((daikon_var(name), str(value), "1"))
        lines.append("")
    return "\n".join(lines) + "\n"


def write_dtrace(records: Iterable[BlockStateRecord], fh: TextIO) -> int:
    n = 0
    for rec in records:
        fh.write(format_record(rec))
        n += 1
    return n


def parse_decls(text: str) -> dict[str, list[tuple[str, str, int]]]:
    """Map ``fn.block`` to its (variable, dec-type, comparability) list."""
    ppts: dict[str, list] = {}
    current = None
    var = None
    for raw in text.splitlines():
        line = raw.strip()
        if raw.startswith("ppt "):
            name = line[4:]
            current = None
            var = None
            if name.endswith(EXIT):
                current = ppts.setdefault(name[: -len(EXIT)], [])
        elif current is None:
            continue
        elif raw.startswith("variable "):
            var = [ir_var(line[9:]), "", DAIKON_EPSILON]
            current.append(var)
        elif var is not None and line.startswith("dec-type "):
            var[1] = line[9:]
        elif var is not None and line.startswith("comparability "):
            var[2] = int(line[14:])
    return {p: [tuple(v) for v in vs] for p, vs in ppts.items()}


def comparability_from_decls(decls: dict) -> dict[str, ComparabilityMap]:
    out: dict[str, ComparabilityMap] = {}
    for ppt, variables in decls.items():
        fn = ppt.split(".", 1)[0]
        cmap = out.setdefault(fn, ComparabilityMap())
        for name, _, cid in variables:
            cmap.assignment[name] = None if cid == DAIKON_EPSILON else cid
    return out


def parse_dtrace(lines: Iterable[str]) -> Iterator[BlockStateRecord]:
    """Stream records back out of dtrace text (EXIT0 entries only)."""
    entry: list[str] = []
    for raw in lines:
        line = raw.rstrip("\n")
        if line.strip():
            entry.append(line)
            continue
        if entry:
            rec = _entry_record(entry)
            entry = []
            if rec is not None:
                yield rec
    if entry:
        rec = _entry_record(entry)
        if rec is not None:
            yield rec


def _entry_record(entry: list[str]):
    head = entry[0]
    if not head.endswith(EXIT):
        return None
    if len(entry) < 3 or entry[1] != "this_invocation_nonce":
        raise ValueError(f"malformed dtrace entry at {head!r}")
    fn, _, block = head[: -len(EXIT)].partition(".")
    body = entry[3:]
    if len(body) % 3:
        raise ValueError(f"truncated variable list in {head!r}")
    obs = tuple(
        (ir_var(body[i]), int(body[i + 1])) for i in range(0, len(body), 3)
    )
    return BlockStateRecord(fn, block, int(entry[2]), obs)
