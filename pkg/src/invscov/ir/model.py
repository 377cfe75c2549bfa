"""Program / Function / BasicBlock / Instruction data model.

Operands are one of:

* ``str``    -- an SSA value name (written ``%name`` in the text form)
* ``int``    -- an integer literal, typed by the instruction using it
* ``Global`` -- the address of a global memory region (``@name``)
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Union

from .types import ScalarType

BINARY_OPS = frozenset(
    {"add", "sub", "mul", "div", "rem", "and", "or", "xor", "shl", "shr"}
)
UNARY_OPS = frozenset({"neg", "not"})
ICMP_PREDS = frozenset({"le", "lt", "eq", "ne"})
TERMINATORS = frozenset({"ret", "br", "jmp", "bug"})
OPCODES = (
    BINARY_OPS
    | UNARY_OPS
    | TERMINATORS
    | {
        "const",
        "cast",
        "icmp",
        "phi",
        "load",
        "store",
        "gep",
        "call",
        "input_read",
        "input_len",
    }
)

MAP_SIZE = 1 << 16
DEFAULT_MEMORY = 1 << 16


@dataclass(frozen=True)
class Global:
    name: str

    def __str__(self) -> str:
        return f"@{self.name}"


Operand = Union[str, int, Global]


def is_value(op: Operand) -> bool:
    return isinstance(op, str)


def fmt_operand(op: Operand) -> str:
    if isinstance(op, str):
        return f"%{op}"
    return str(op)


@dataclass
class Instruction:
    opcode: str
    result: Optional[str] = None
    type: Optional[ScalarType] = None
    operands: tuple = ()
    pred: Optional[str] = None  # icmp predicate
    labels: tuple = ()  # branch targets, or phi incoming blocks
    callee: Optional[str] = None
    strides: tuple = ()  # gep multipliers for all but the last index
    line: int = 0

    @property
    def is_terminator(self) -> bool:
        return self.opcode in TERMINATORS

    def value_operands(self) -> list[str]:
        return [op for op in self.operands if isinstance(op, str)]

    def __str__(self) -> str:
        ops = ", ".join(fmt_operand(o) for o in self.operands)
        lhs = f"%{self.result} = " if self.result is not None else ""
        op = f"icmp.{self.pred}" if self.opcode == "icmp" else self.opcode
        ty = f" {self.type}" if self.type is not None else ""
        if self.opcode == "phi":
            inc = ", ".join(
                f"[{fmt_operand(v)}, {lab}]" for v, lab in zip(self.operands, self.labels)
            )
            return f"{lhs}phi{ty} {inc}"
        if self.opcode == "call":
            return f"{lhs}call{ty or ' void'} @{self.callee}({ops})"
        if self.opcode == "br":
            return f"br {ops}, {self.labels[0]}, {self.labels[1]}"
        if self.opcode == "jmp":
            return f"jmp {self.labels[0]}"
        if self.opcode == "ret" and not self.operands:
            return "ret void"
        tail = f" strides {', '.join(map(str, self.strides))}" if self.strides else ""
        return f"{lhs}{op}{ty}{' ' if ops else ''}{ops}{tail}"


@dataclass
class BasicBlock:
    id: int
    label: str
    body: list[Instruction] = field(default_factory=list)
    terminator: Optional[Instruction] = None
    loc: int = 0
    line: int = 0

    @property
    def instructions(self) -> list[Instruction]:
        if self.terminator is None:
            return list(self.body)
        return [*self.body, self.terminator]

    @property
    def phis(self) -> list[Instruction]:
        return [i for i in self.body if i.opcode == "phi"]

    def successors(self) -> list[str]:
        t = self.terminator
        if t is None or t.opcode not in ("br", "jmp"):
            return []
        return list(t.labels)


@dataclass
class Function:
    name: str
    params: list[tuple[str, ScalarType]]
    ret_type: Optional[ScalarType]
    blocks: list[BasicBlock] = field(default_factory=list)
    line: int = 0
    dead_blocks: frozenset = frozenset()
    # filled by the validator
    value_types: dict[str, ScalarType] = field(default_factory=dict)
    definitions: dict[str, Instruction] = field(default_factory=dict)

    def block(self, label: str) -> BasicBlock:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)

    def label_to_id(self) -> dict[str, int]:
        return {b.label: b.id for b in self.blocks}

    def instructions(self):
        for b in self.blocks:
            yield from b.instructions


@dataclass
class GlobalRegion:
    name: str
    address: int
    size: int
    init: bytes = b""


@dataclass
class Program:
    functions: list[Function]
    entry: str
    seed: int = 0
    memory_size: int = DEFAULT_MEMORY
    globals: dict[str, GlobalRegion] = field(default_factory=dict)
    source: str = ""

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def entry_function(self) -> Function:
        return self.function(self.entry)

    def assign_locations(self) -> None:
        """Draw block locations without replacement from the header seed."""
        blocks = [b for f in self.functions for b in f.blocks]
        rng = random.Random(self.seed)
        for block, loc in zip(blocks, rng.sample(range(MAP_SIZE), len(blocks))):
            block.loc = loc

    def initial_memory(self) -> bytearray:
        mem = bytearray(self.memory_size)
        for g in self.globals.values():
            mem[g.address : g.address + len(g.init)] = g.init
        return mem


def block_state_names(block: BasicBlock) -> list[str]:
    """SSA values used or defined in ``block``, in order of first appearance.

    Phi operands are uses on the incoming edge and are not part of the
    block's own state; the phi result is.
    """
    seen: dict[str, None] = {}
    for ins in block.instructions:
        if ins.opcode != "phi":
            for op in ins.operands:
                if isinstance(op, str):
                    seen.setdefault(op)
        if ins.result is not None:
            seen.setdefault(ins.result)
    return list(seen)


def ppt_name(function: str, label: str) -> str:
    return f"{function}.{label}"
