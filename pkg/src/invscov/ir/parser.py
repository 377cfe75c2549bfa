"""Parser and validator for the textual IR (grammar in docs/ir.md)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .cfg import build_cfg, dominator_tree
from .model import (
    BINARY_OPS,
    DEFAULT_MEMORY,
    ICMP_PREDS,
    OPCODES,
    UNARY_OPS,
    BasicBlock,
    Function,
    Global,
    GlobalRegion,
    Instruction,
    Program,
)
from .types import ADDR, BOOL, TYPES, ScalarType

_NAME = r"(?:[A-Za-z][A-Za-z0-9_.]*|[0-9]+)"
_IDENT = r"[A-Za-z][A-Za-z0-9_.]*"
_HEADER_RE = re.compile(r"^program\b(.*)$")
_GLOBAL_RE = re.compile(rf"^global\s+@({_IDENT})\s+(\d+)\s*(?:=\s*(.*))?$")
_FUNC_RE = re.compile(r"^func\s+@([A-Za-z][A-Za-z0-9_]*)\s*\((.*)\)\s*->\s*(\w+)\s*\{$")
_LABEL_RE = re.compile(rf"^({_IDENT}):$")
_ASSIGN_RE = re.compile(rf"^%({_NAME})\s*=\s*(.*)$")
_OPERAND_RE = re.compile(rf"^(?:%({_NAME})|@({_IDENT})|(-?(?:0x[0-9a-fA-F]+|\d+)))$")
_PHI_ARM_RE = re.compile(r"\[\s*([^,\]]+?)\s*,\s*([A-Za-z][A-Za-z0-9_.]*)\s*\]")
_CALL_RE = re.compile(rf"^(\w+)\s+@({_IDENT})\s*\((.*)\)$")

GLOBAL_BASE = 0x100


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class ParseError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ValidationError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


def _type(tok: str, line: int) -> ScalarType:
    try:
        return TYPES[tok]
    except KeyError:
        raise ParseError(line, f"unknown type {tok!r}") from None


def _operand(tok: str, line: int):
    m = _OPERAND_RE.match(tok.strip())
    if not m:
        raise ParseError(line, f"bad operand {tok!r}")
    if m.group(1) is not None:
        return m.group(1)
    if m.group(2) is not None:
        return Global(m.group(2))
    return int(m.group(3), 0)


def _operands(text: str, line: int) -> list:
    text = text.strip()
    if not text:
        return []
    return [_operand(t, line) for t in text.split(",")]


def _split_type(rest: str, line: int) -> tuple[ScalarType, str]:
    parts = rest.strip().split(None, 1)
    if not parts:
        raise ParseError(line, "missing type")
    return _type(parts[0], line), (parts[1] if len(parts) > 1 else "")


def parse_instruction(text: str, line: int) -> Optional[Instruction]:
    """Parse one instruction line; returns None for an unknown opcode."""
    result = None
    m = _ASSIGN_RE.match(text)
    if m:
        result, text = m.group(1), m.group(2)
    parts = text.split(None, 1)
    head = parts[0]
    rest = parts[1] if len(parts) > 1 else ""
    opcode, _, pred = head.partition(".")
    if opcode not in OPCODES:
        return None
    ins = Instruction(opcode=opcode, result=result, line=line)

    if opcode == "icmp":
        if pred not in ICMP_PREDS:
            raise ParseError(line, f"unknown icmp predicate {pred!r}")
        ins.pred = pred
    elif pred:
        raise ParseError(line, f"unexpected suffix on {opcode!r}")

    if opcode == "const":
        ins.type, rest = _split_type(rest, line)
        ins.operands = tuple(_operands(rest, line))
    elif opcode in BINARY_OPS or opcode in UNARY_OPS or opcode in (
        "cast", "icmp", "load", "store", "input_read"
    ):
        ins.type, rest = _split_type(rest, line)
        ins.operands = tuple(_operands(rest, line))
    elif opcode == "input_len":
        ins.type, rest = _split_type(rest, line)
        if rest.strip():
            raise ParseError(line, "input_len takes no operands")
    elif opcode == "gep":
        ins.type, rest = _split_type(rest, line)
        rest, _, strides = rest.partition("strides")
        ins.operands = tuple(_operands(rest, line))
        if strides.strip():
            try:
                ins.strides = tuple(int(s, 0) for s in strides.split(","))
            except ValueError:
                raise ParseError(line, "bad gep strides") from None
    elif opcode == "phi":
        ins.type, rest = _split_type(rest, line)
        arms = _PHI_ARM_RE.findall(rest)
        if not arms:
            raise ParseError(line, "phi needs at least one [value, block] arm")
        ins.operands = tuple(_operand(v, line) for v, _ in arms)
        ins.labels = tuple(lab for _, lab in arms)
    elif opcode == "call":
        cm = _CALL_RE.match(rest.strip())
        if not cm:
            raise ParseError(line, "malformed call")
        ins.type = None if cm.group(1) == "void" else _type(cm.group(1), line)
        ins.callee = cm.group(2)
        ins.operands = tuple(_operands(cm.group(3), line))
    elif opcode == "ret":
        rest = rest.strip()
        if rest != "void":
            ins.type, rest = _split_type(rest, line)
            ins.operands = tuple(_operands(rest, line))
    elif opcode == "br":
        toks = [t.strip() for t in rest.split(",")]
        if len(toks) != 3:
            raise ParseError(line, "br expects: br <cond>, <label>, <label>")
        ins.operands = (_operand(toks[0], line),)
        ins.labels = (toks[1], toks[2])
    elif opcode == "jmp":
        if not re.fullmatch(_IDENT, rest.strip()):
            raise ParseError(line, "jmp expects a block label")
        ins.labels = (rest.strip(),)
    elif opcode == "bug":
        if rest.strip():
            raise ParseError(line, "bug takes no operands")
    return ins


def _parse_params(text: str, line: int) -> list[tuple[str, ScalarType]]:
    params = []
    text = text.strip()
    if not text:
        return params
    for chunk in text.split(","):
        toks = chunk.split()
        if len(toks) != 2 or not toks[1].startswith("%"):
            raise ParseError(line, f"bad parameter {chunk.strip()!r}")
        params.append((toks[1][1:], _type(toks[0], line)))
    return params


def parse_program(text: str) -> Program:
    """Parse and validate IR text. Raises ParseError or ValidationError."""
    diags: list[Diagnostic] = []
    header: Optional[dict] = None
    globals_: dict[str, GlobalRegion] = {}
    functions: list[Function] = []
    fn: Optional[Function] = None
    block: Optional[BasicBlock] = None
    next_addr = GLOBAL_BASE

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if fn is None:
            if (m := _HEADER_RE.match(line)) is not None:
                if header is not None:
                    raise ParseError(lineno, "duplicate program header")
                header = {"line": lineno}
                for kv in m.group(1).split():
                    k, eq, v = kv.partition("=")
                    if not eq:
                        raise ParseError(lineno, f"bad header field {kv!r}")
                    header[k] = v
            elif (m := _GLOBAL_RE.match(line)) is not None:
                name, size = m.group(1), int(m.group(2))
                init = bytes(int(t, 0) & 0xFF for t in (m.group(3) or "").split())
                if len(init) > size:
                    raise ParseError(lineno, f"initializer of @{name} exceeds its size")
                if name in globals_:
                    diags.append(Diagnostic(lineno, f"duplicate global @{name}"))
                globals_[name] = GlobalRegion(name, next_addr, size, init)
                next_addr += (size + 7) & ~7
            elif (m := _FUNC_RE.match(line)) is not None:
                ret = None if m.group(3) == "void" else _type(m.group(3), lineno)
                fn = Function(m.group(1), _parse_params(m.group(2), lineno), ret, line=lineno)
                block = None
            else:
                raise ParseError(lineno, f"expected header, global or func, got {line!r}")
            continue

        if line == "}":
            functions.append(fn)
            fn = None
            continue
        if (m := _LABEL_RE.match(line)) is not None:
            block = BasicBlock(len(fn.blocks), m.group(1), line=lineno)
            fn.blocks.append(block)
            continue
        if block is None:
            raise ParseError(lineno, "instruction outside of a block")
        ins = parse_instruction(line, lineno)
        if ins is None:
            diags.append(Diagnostic(lineno, f"unknown opcode {line.split()[0]!r}"))
            continue
        if block.terminator is not None:
            diags.append(
                Diagnostic(lineno, f"block {block.label}: instruction after terminator")
            )
            continue
        if ins.is_terminator:
            block.terminator = ins
        else:
            block.body.append(ins)

    if fn is not None:
        raise ParseError(fn.line, f"function @{fn.name} is not closed")
    if header is None:
        raise ParseError(1, "missing 'program' header line")

    entry = header.get("entry", "@main").lstrip("@")
    try:
        seed = int(header.get("seed", "0"), 0)
        memory = int(header.get("memory", str(DEFAULT_MEMORY)), 0)
    except ValueError:
        raise ParseError(header["line"], "seed and memory must be integers") from None
    if next_addr > memory:
        diags.append(Diagnostic(header["line"], "globals do not fit in memory"))

    prog = Program(functions, entry, seed, memory, globals_, text)
    diags.extend(validate(prog))
    if diags:
        raise ValidationError(sorted(diags, key=lambda d: d.line))
    prog.assign_locations()
    return prog


def load_program(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


# --- validation -------------------------------------------------------------


def validate(prog: Program) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    names = [f.name for f in prog.functions]
    for f in prog.functions:
        if names.count(f.name) > 1 and f is not prog.function(f.name):
            diags.append(Diagnostic(f.line, f"duplicate function @{f.name}"))
    if prog.entry not in names:
        diags.append(Diagnostic(1, f"entry function @{prog.entry} is not defined"))
    sigs = {f.name: f for f in prog.functions}
    for f in prog.functions:
        diags.extend(_validate_function(f, sigs, prog))
    return diags


def _validate_function(f: Function, sigs: dict, prog: Program) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    def err(line, msg):
        diags.append(Diagnostic(line, f"@{f.name}: {msg}"))

    if not f.blocks:
        err(f.line, "empty function body: missing terminator")
        return diags

    labels = [b.label for b in f.blocks]
    for b in f.blocks:
        if labels.count(b.label) > 1 and f.block(b.label) is not b:
            err(b.line, f"duplicate block label {b.label}")
        if b.terminator is None:
            err(b.line, f"block {b.label}: missing terminator")
        for label in b.successors():
            if label not in labels:
                err(b.terminator.line, f"unknown block label {label}")
        t = b.terminator
        if t is not None and t.opcode == "br" and t.labels[0] == t.labels[1]:
            err(t.line, "conditional branch targets must differ")
    if diags:
        return diags

    # single assignment
    types: dict[str, ScalarType] = {}
    defs: dict[str, Instruction] = {}
    def_site: dict[str, tuple[int, int]] = {}
    for name, ty in f.params:
        if name in types:
            err(f.line, f"value %{name} assigned more than once (values are assigned only once)")
        types[name] = ty
        def_site[name] = (-1, -1)
    for b in f.blocks:
        for idx, ins in enumerate(b.instructions):
            if ins.result is None:
                continue
            if ins.result in types:
                err(ins.line, f"value %{ins.result} assigned more than once "
                              "(values are assigned only once)")
                continue
            ty = ins.type
            if ins.opcode == "icmp":
                ty = BOOL
            elif ins.opcode == "gep":
                ty = ADDR
            if ty is None:
                err(ins.line, f"%{ins.result} needs a result type")
                continue
            types[ins.result] = ty
            defs[ins.result] = ins
            def_site[ins.result] = (b.id, idx)
    f.value_types = types
    f.definitions = defs

    cfg = build_cfg(f)
    live = cfg.reachable()
    f.dead_blocks = frozenset(n for n in cfg.nodes if n not in live)
    dom = dominator_tree(cfg.restrict(live))
    by_label = {b.label: b for b in f.blocks}

    def available(name: str, block_id: int, idx: int) -> bool:
        site = def_site.get(name)
        if site is None:
            return False
        db, di = site
        if db == -1:
            return True
        if db == block_id:
            return di < idx
        if block_id not in live or db not in live:
            return True  # dead code is only flagged
        return dom.dominates(db, block_id)

    def check_operand(op, ins, b_id, idx, expect: Optional[ScalarType], what="operand"):
        if isinstance(op, Global):
            if op.name not in prog.globals:
                err(ins.line, f"unknown global @{op.name}")
            elif expect is not None and expect != ADDR:
                err(ins.line, f"global @{op.name} used as a {expect} {what}")
            return
        if isinstance(op, int):
            if expect is not None and not (expect.lo <= op <= expect.mask):
                err(ins.line, f"literal {op} does not fit {expect}")
            return
        if op not in types:
            err(ins.line, f"use of undefined value %{op}")
            return
        if not available(op, b_id, idx):
            err(ins.line, f"%{op} is not defined before this use")
        if expect is not None and types[op] != expect:
            err(ins.line, f"{what} %{op} has type {types[op]}, expected {expect}")

    for b in f.blocks:
        preds = sorted(f.blocks[p].label for p in cfg.pred[b.id])
        seen_non_phi = False
        for idx, ins in enumerate(b.instructions):
            op = ins.opcode
            n = len(ins.operands)
            if op == "phi":
                if seen_non_phi:
                    err(ins.line, "phi must appear at the head of its block")
                if b.id in live and sorted(ins.labels) != preds:
                    err(ins.line, f"phi incoming blocks {sorted(ins.labels)} "
                                  f"do not match predecessors {preds}")
                for v, lab in zip(ins.operands, ins.labels):
                    if lab in by_label:
                        pb = by_label[lab]
                        check_operand(v, ins, pb.id, len(pb.instructions), ins.type)
                continue
            seen_non_phi = True
            if op in BINARY_OPS or op == "icmp":
                if n != 2:
                    err(ins.line, f"{op} takes two operands")
                for v in ins.operands:
                    check_operand(v, ins, b.id, idx, ins.type)
            elif op in UNARY_OPS:
                if n != 1:
                    err(ins.line, f"{op} takes one operand")
                for v in ins.operands:
                    check_operand(v, ins, b.id, idx, ins.type)
            elif op == "cast":
                if n != 1:
                    err(ins.line, "cast takes one operand")
                for v in ins.operands:
                    check_operand(v, ins, b.id, idx, None)
            elif op == "const":
                if n != 1 or not isinstance(ins.operands[0], int):
                    err(ins.line, "const takes one integer literal")
                else:
                    check_operand(ins.operands[0], ins, b.id, idx, ins.type)
            elif op == "load":
                if n != 1:
                    err(ins.line, "load takes one address operand")
                for v in ins.operands:
                    check_operand(v, ins, b.id, idx, ADDR, "address")
            elif op == "store":
                if n != 2:
                    err(ins.line, "store takes an address and a value")
                    continue
                check_operand(ins.operands[0], ins, b.id, idx, ADDR, "address")
                if not isinstance(ins.operands[1], str):
                    err(ins.line, "stored value must be an SSA value")
                check_operand(ins.operands[1], ins, b.id, idx, ins.type, "stored value")
            elif op == "gep":
                if n < 2:
                    err(ins.line, "gep takes an address and at least one index")
                    continue
                check_operand(ins.operands[0], ins, b.id, idx, ADDR, "address")
                for v in ins.operands[1:]:
                    check_operand(v, ins, b.id, idx, None, "index")
                if len(ins.strides) != n - 2:
                    err(ins.line, f"gep with {n - 1} indices needs {n - 2} strides")
            elif op == "call":
                callee = sigs.get(ins.callee)
                if callee is None:
                    err(ins.line, f"call to undefined function @{ins.callee}")
                    continue
                if n != len(callee.params):
                    err(ins.line, f"@{ins.callee} expects {len(callee.params)} arguments")
                for v, (_, pty) in zip(ins.operands, callee.params):
                    check_operand(v, ins, b.id, idx, pty, "argument")
                if ins.result is not None and ins.type != callee.ret_type:
                    err(ins.line, f"@{ins.callee} returns {callee.ret_type}")
            elif op == "input_read":
                if n != 1:
                    err(ins.line, "input_read takes one index operand")
                for v in ins.operands:
                    check_operand(v, ins, b.id, idx, None, "index")
            elif op == "ret":
                if f.ret_type is None:
                    if n:
                        err(ins.line, "void function returns a value")
                else:
                    if n != 1:
                        err(ins.line, f"missing return value of type {f.ret_type}")
                    elif ins.type != f.ret_type:
                        err(ins.line, f"return type {ins.type} != {f.ret_type}")
                    for v in ins.operands:
                        check_operand(v, ins, b.id, idx, f.ret_type, "return value")
            elif op == "br":
                check_operand(ins.operands[0], ins, b.id, idx, None, "condition")
            if ins.result is not None and op in ("store", "br", "jmp", "ret", "bug"):
                err(ins.line, f"{op} does not produce a value")
            if ins.result is None and op not in ("store", "call", "br", "jmp", "ret", "bug"):
                err(ins.line, f"{op} result must be named")
    return diags
