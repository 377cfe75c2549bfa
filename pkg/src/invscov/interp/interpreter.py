"""Reference interpreter with block/instruction hooks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..ir.model import (
    BINARY_OPS,
    UNARY_OPS,
    BasicBlock,
    Function,
    Global,
    Instruction,
    Program,
    block_state_names,
)
from ..ir.types import ADDR
from . import semantics

DEFAULT_BUDGET = 1_000_000
MAX_CALL_DEPTH = 200

FAULT_KINDS = ("bug-instruction", "div-by-zero", "oob-memory", "oob-input")


@dataclass(frozen=True)
class Fault:
    kind: str
    function: str
    block: str
    frames: tuple  # ((function, block label), ...) outermost first


@dataclass
class ExecutionResult:
    outcome: str  # "ok" | "fault" | "budget-exhausted"
    fault: Optional[Fault] = None
    steps: int = 0
    blocks_executed: int = 0
    exit_value: Optional[int] = None

    @property
    def crashed(self) -> bool:
        return self.outcome == "fault"


@dataclass(frozen=True)
class BlockState:
    """Values of every SSA name used or defined by a block, at block exit."""

    function: str
    block: int
    label: str
    activation: int
    values: tuple  # ((name, value), ...)

    def as_dict(self) -> dict[str, int]:
        return dict(self.values)


@dataclass(frozen=True)
class InstructionEvent:
    activation: int
    function: str
    block: str
    index: int
    binding: Optional[tuple] = None  # (name, value)
    write: Optional[tuple] = None  # (address, size, value)


class Hooks:
    """Callbacks fired by :func:`execute`; subclasses override what they need."""

    wants_instructions = False

    def block_enter(self, function: Function, block: BasicBlock, activation: int) -> None:
        pass

    def block_exit(self, state: BlockState) -> None:
        pass

    def instruction(self, event: InstructionEvent) -> None:
        pass

    def fault(self, fault: Fault) -> None:
        pass


class HookChain(Hooks):
    def __init__(self, *hooks: Hooks):
        self.hooks = [h for h in hooks if h is not None]
        self.wants_instructions = any(h.wants_instructions for h in self.hooks)

    def block_enter(self, function, block, activation):
        for h in self.hooks:
            h.block_enter(function, block, activation)

    def block_exit(self, state):
        for h in self.hooks:
            h.block_exit(state)

    def instruction(self, event):
        for h in self.hooks:
            h.instruction(event)

    def fault(self, fault):
        for h in self.hooks:
            h.fault(fault)


class _Fault(Exception):
    def __init__(self, kind: str):
        self.kind = kind


class _OutOfBudget(Exception):
    pass


class _Machine:
    def __init__(self, program: Program, data: bytes, hooks: Hooks, budget: int):
        self.program = program
        self.data = bytes(data)
        self.mem = program.initial_memory()
        self.hooks = hooks
        self.trace_ins = hooks.wants_instructions
        self.budget = budget
        self.steps = 0
        self.blocks = 0
        self.activations = 0
        self.frames: list[list] = []
        self.state_names = {}
        self.functions = {f.name: f for f in program.functions}

    def _names(self, block: BasicBlock) -> list[str]:
        key = id(block)
        names = self.state_names.get(key)
        if names is None:
            names = self.state_names[key] = block_state_names(block)
        return names

    def value(self, env: dict, op, ty=None) -> int:
        if isinstance(op, str):
            return env[op]
        if isinstance(op, Global):
            return self.program.globals[op.name].address
        return ty.wrap(op) if ty is not None else op

    def call(self, f: Function, args: Sequence[int]) -> Optional[int]:
        if len(self.frames) >= MAX_CALL_DEPTH:
            raise _OutOfBudget
        env = {name: ty.wrap(v) for (name, ty), v in zip(f.params, args)}
        act = self.activations
        self.activations += 1
        frame = [f.name, f.blocks[0].label]
        self.frames.append(frame)
        hooks = self.hooks
        block = f.blocks[0]
        prev: Optional[str] = None
        while True:
            instrs = block.instructions
            self.steps += len(instrs)
            if self.steps > self.budget:
                raise _OutOfBudget
            self.blocks += 1
            frame[1] = block.label
            hooks.block_enter(f, block, act)

            phis = block.phis
            if phis:
                vals = [
                    self.value(env, p.operands[p.labels.index(prev)], p.type) for p in phis
                ]
                for i, (p, v) in enumerate(zip(phis, vals)):
                    env[p.result] = v
                    if self.trace_ins:
                        hooks.instruction(
                            InstructionEvent(act, f.name, block.label, i, (p.result, v))
                        )
            for idx in range(len(phis), len(block.body)):
                self.step(env, block.body[idx], f, block, act, idx)

            term = block.terminator
            if self.trace_ins:
                hooks.instruction(InstructionEvent(act, f.name, block.label, len(instrs) - 1))
            if term.opcode == "bug":
                raise _Fault("bug-instruction")
            hooks.block_exit(
                BlockState(
                    f.name,
                    block.id,
                    block.label,
                    act,
                    tuple((n, env[n]) for n in self._names(block)),
                )
            )
            if term.opcode == "ret":
                self.frames.pop()
                if term.operands:
                    return self.value(env, term.operands[0], term.type)
                return None
            if term.opcode == "jmp":
                target = term.labels[0]
            else:
                cond = self.value(env, term.operands[0])
                target = term.labels[0] if cond != 0 else term.labels[1]
            prev = block.label
            block = f.block(target)

    def step(self, env, ins: Instruction, f, block, act, idx) -> None:
        op = ins.opcode
        ty = ins.type
        write = None
        if op in BINARY_OPS:
            a = self.value(env, ins.operands[0], ty)
            b = self.value(env, ins.operands[1], ty)
            try:
                r = semantics.binop(op, ty, a, b)
            except semantics.DivisionByZero:
                raise _Fault("div-by-zero") from None
        elif op in UNARY_OPS:
            r = semantics.unop(op, ty, self.value(env, ins.operands[0], ty))
        elif op == "const":
            r = ty.wrap(ins.operands[0])
        elif op == "cast":
            r = ty.wrap(self.value(env, ins.operands[0]))
        elif op == "icmp":
            r = semantics.icmp(
                ins.pred,
                self.value(env, ins.operands[0], ty),
                self.value(env, ins.operands[1], ty),
            )
        elif op == "gep":
            base = self.value(env, ins.operands[0])
            idxs = [self.value(env, o) for o in ins.operands[1:]]
            r = ADDR.wrap(base + semantics.gep_offset(ty.size, idxs, ins.strides))
        elif op == "load":
            addr = self.value(env, ins.operands[0])
            if addr + ty.size > len(self.mem):
                raise _Fault("oob-memory")
            r = int.from_bytes(self.mem[addr : addr + ty.size], "little", signed=ty.signed)
        elif op == "store":
            addr = self.value(env, ins.operands[0])
            v = self.value(env, ins.operands[1], ty)
            if addr + ty.size > len(self.mem):
                raise _Fault("oob-memory")
            self.mem[addr : addr + ty.size] = (v & ty.mask).to_bytes(ty.size, "little")
            r = None
            write = (addr, ty.size, v)
        elif op == "input_read":
            i = self.value(env, ins.operands[0])
            if i < 0 or i + ty.size > len(self.data):
                raise _Fault("oob-input")
            r = int.from_bytes(self.data[i : i + ty.size], "little", signed=ty.signed)
        elif op == "input_len":
            r = ty.wrap(len(self.data))
        elif op == "call":
            callee = self.functions[ins.callee]
            args = [
                self.value(env, o, pty) for o, (_, pty) in zip(ins.operands, callee.params)
            ]
            r = self.call(callee, args)
        else:
            raise AssertionError(f"unexpected opcode {op}")
        binding = None
        if ins.result is not None:
            env[ins.result] = r
            binding = (ins.result, r)
        if self.trace_ins:
            self.hooks.instruction(
                InstructionEvent(act, f.name, block.label, idx, binding, write)
            )


def execute(
    program: Program,
    data: bytes,
    hooks: Optional[Hooks] = None,
    budget: int = DEFAULT_BUDGET,
    args: Optional[Sequence[int]] = None,
) -> ExecutionResult:
    """Run ``program``'s entry function on input ``data``.

    Steps are charged per block at block entry (one per instruction).
    Budget exhaustion and call-depth overflow both report
    ``budget-exhausted``; they are never counted as crashes.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    hooks = hooks or Hooks()
    m = _Machine(program, data, hooks, budget)
    entry = program.entry_function
    if args is None:
        args = [0] * len(entry.params)
    try:
        value = m.call(entry, list(args))
    except _Fault as exc:
        frames = tuple((fn, label) for fn, label in m.frames)
        fault = Fault(exc.kind, frames[-1][0], frames[-1][1], frames)
        hooks.fault(fault)
        return ExecutionResult("fault", fault, m.steps, m.blocks)
    except _OutOfBudget:
        return ExecutionResult("budget-exhausted", None, m.steps, m.blocks)
    return ExecutionResult("ok", None, m.steps, m.blocks, value)
