"""Compiling an IR program into instrumented Python for fast fuzzing.

Each IR function becomes a nested Python function whose locals hold the SSA
values; blocks are selected through a binary if-tree on the block id. Every
block entry logs its edge into the hit trace and every block exit XORs the
outcomes of its invariant checks into ``prev``, the same way the reference
hooks do. The generated code is tested for equivalence against the
interpreter.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from ..interp.interpreter import DEFAULT_BUDGET, MAX_CALL_DEPTH, Fault
from ..interp.semantics import trunc_div, trunc_rem
from ..ir.model import BINARY_OPS, BasicBlock, Function, Global, Instruction, Program, ppt_name
from ..ir.types import ADDR, ScalarType


class TargetFault(Exception):
    def __init__(self, kind: str, function: str, block: str):
        super().__init__(kind)
        self.kind = kind
        self.function = function
        self.block = block


class Exhausted(Exception):
    pass


@dataclass
class TargetResult:
    outcome: str  # "ok" | "fault" | "budget-exhausted"
    steps: int
    hits: Counter  # edge index -> raw count (not yet saturated)
    fault: Optional[Fault] = None
    exit_value: Optional[int] = None
    outcomes: Optional[list] = None  # (ppt, invariant id, outcome) when observing


_CMP = {"lt": "<", "le": "<=", "eq": "==", "ne": "!="}
_ARITH = {"add": "+", "sub": "-", "mul": "*"}
_BITS = {"and": "&", "or": "|", "xor": "^"}


def _wrap(expr: str, ty: ScalarType) -> str:
    if ty.signed:
        h = 1 << (ty.bits - 1)
        return f"(({expr}) + {h} & {ty.mask}) - {h}"
    return f"({expr}) & {ty.mask}"


def _predicate(kind: str, names: list[str], params: tuple) -> str:
    x = names[0]
    if kind == "const-equal":
        return f"{x} == {params[0]}"
    if kind == "one-of":
        return f"{x} in {tuple(params)!r}"
    if kind == "lower-bound":
        return f"{x} >= {params[0]}"
    if kind == "upper-bound":
        return f"{x} <= {params[0]}"
    if kind == "non-zero":
        return f"{x} != 0"
    y = names[1]
    if kind == "eq-vars":
        return f"{x} == {y}"
    if kind == "le-vars":
        return f"{x} <= {y}"
    if kind == "linear":
        a, b = params
        return f"{y} == {a} * {x} + {b}"
    raise ValueError(kind)


class _Emitter:
    def __init__(self):
        self.lines: list[str] = []

    def __call__(self, depth: int, text: str) -> None:
        self.lines.append("    " * depth + text)


class _FunctionCompiler:
    def __init__(self, program: Program, f: Function, sites: dict, reused: set, observe: bool):
        self.program = program
        self.f = f
        self.sites = sites
        self.reused = reused
        self.observe = observe
        self.local = {}
        for name, _ in f.params:
            self.local.setdefault(name, f"v{len(self.local)}")
        for ins in f.instructions():
            if ins.result is not None:
                self.local.setdefault(ins.result, f"v{len(self.local)}")
        self.ids = f.label_to_id()
        self.phi_succs = {
            b.id for b in f.blocks if any(
                f.block(s).phis for s in b.successors()
            )
        }

    def operand(self, op, ty: Optional[ScalarType] = None) -> str:
        if isinstance(op, str):
            return self.local[op]
        if isinstance(op, Global):
            return str(self.program.globals[op.name].address)
        return str(ty.wrap(op) if ty is not None else op)

    def literal(self, op) -> Optional[int]:
        if isinstance(op, int):
            return op
        if isinstance(op, Global):
            return self.program.globals[op.name].address
        return None

    def source_type(self, op) -> Optional[ScalarType]:
        return self.f.value_types.get(op) if isinstance(op, str) else None

    def fault(self, kind: str, block: BasicBlock) -> str:
        return f"raise TargetFault({kind!r}, {self.f.name!r}, {block.label!r})"

    def compile(self, out: _Emitter) -> None:
        f = self.f
        params = ", ".join(self.local[n] for n, _ in f.params)
        out(1, f"def f_{f.name}({params}):")
        out(2, "nonlocal prev, steps")
        out(2, f"if len(stk) >= {MAX_CALL_DEPTH}:")
        out(3, "raise Exhausted")
        out(2, f"b = {f.blocks[0].id}")
        out(2, "pb = -1")
        out(2, "while True:")
        self.tree(out, 3, [b.id for b in f.blocks])

    def tree(self, out: _Emitter, depth: int, ids: list[int]) -> None:
        if len(ids) == 1:
            self.block(out, depth, self.f.blocks[ids[0]])
            return
        mid = len(ids) // 2
        out(depth, f"if b < {ids[mid]}:")
        self.tree(out, depth + 1, ids[:mid])
        out(depth, "else:")
        self.tree(out, depth + 1, ids[mid:])

    def block(self, out: _Emitter, d: int, b: BasicBlock) -> None:
        out(d, f"steps += {len(b.instructions)}")
        out(d, "if steps > budget:")
        out(d + 1, "raise Exhausted")
        out(d, f"ap({b.loc} ^ prev)")
        out(d, f"prev = {b.loc >> 1}")
        phis = b.phis
        if phis:
            by_pred: dict[str, list[str]] = {}
            for p in phis:
                for v, lab in zip(p.operands, p.labels):
                    by_pred.setdefault(lab, []).append(self.operand(v, p.type))
            targets = ", ".join(self.local[p.result] for p in phis)
            first = True
            for lab, vals in by_pred.items():
                kw = "if" if first else "elif"
                out(d, f"{kw} pb == {self.ids[lab]}:")
                out(d + 1, f"{targets} = {', '.join(vals)}")
                first = False
        for ins in b.body:
            if ins.opcode != "phi":
                self.instruction(out, d, b, ins)
        term = b.terminator
        if term.opcode == "bug":
            out(d, self.fault("bug-instruction", b))
            return
        self.checks(out, d, b)
        if term.opcode == "ret":
            if term.operands:
                out(d, f"return {self.operand(term.operands[0], term.type)}")
            else:
                out(d, "return None")
            return
        if b.id in self.phi_succs:
            out(d, f"pb = {b.id}")
        if term.opcode == "jmp":
            out(d, f"b = {self.ids[term.labels[0]]}")
        else:
            t, e = (self.ids[lab] for lab in term.labels)
            lit = self.literal(term.operands[0])
            if lit is not None:
                out(d, f"b = {t if lit != 0 else e}")
            else:
                out(d, f"b = {t} if {self.operand(term.operands[0])} else {e}")

    def checks(self, out: _Emitter, d: int, b: BasicBlock) -> None:
        ppt = ppt_name(self.f.name, b.label)
        for site in self.sites.get(ppt, ()):
            inv = site.invariant
            code = inv.id << 1
            var = f"o{inv.id}"
            if site.emitted_here:
                names = [self.local[v] for v in inv.vars]
                pred = _predicate(inv.kind, names, inv.params)
                if inv.id in self.reused or self.observe:
                    out(d, f"{var} = 0 if {pred} else {code}")
                    out(d, f"prev ^= {var}")
                else:
                    out(d, f"if not ({pred}):")
                    out(d + 1, f"prev ^= {code}")
                    continue
            else:
                out(d, f"prev ^= {var}")
            if self.observe:
                out(d, f"rec(({ppt!r}, {inv.id}, {var}))")

    def instruction(self, out: _Emitter, d: int, b: BasicBlock, ins: Instruction) -> None:
        op = ins.opcode
        ty = ins.type
        r = self.local.get(ins.result) if ins.result is not None else None
        ops = ins.operands
        if op in BINARY_OPS:
            a = self.operand(ops[0], ty)
            c = self.operand(ops[1], ty)
            if op in _ARITH:
                out(d, f"{r} = {_wrap(f'{a} {_ARITH[op]} {c}', ty)}")
            elif op in _BITS:
                out(d, f"{r} = {a} {_BITS[op]} {c}")
            elif op in ("div", "rem"):
                lit = self.literal(ops[1])
                if lit is None or ty.wrap(lit) == 0:
                    out(d, f"if {c} == 0:")
                    out(d + 1, self.fault("div-by-zero", b))
                if not ty.signed:
                    sym = "//" if op == "div" else "%"
                    out(d, f"{r} = {a} {sym} {c}")
                else:
                    fn = "tdiv" if op == "div" else "trem"
                    out(d, f"{r} = {_wrap(f'{fn}({a}, {c})', ty)}")
            elif op == "shl":
                out(d, f"{r} = {_wrap(f'{a} << ({c} & {ty.bits - 1})', ty)}")
            else:  # shr
                out(d, f"{r} = {a} >> ({c} & {ty.bits - 1})")
        elif op == "neg":
            out(d, f"{r} = {_wrap('-' + self.operand(ops[0], ty), ty)}")
        elif op == "not":
            out(d, f"{r} = {_wrap('~' + self.operand(ops[0], ty), ty)}")
        elif op == "const":
            out(d, f"{r} = {ty.wrap(ops[0])}")
        elif op == "cast":
            src = self.source_type(ops[0])
            v = self.operand(ops[0])
            if src is not None and ty.lo <= src.lo and src.hi <= ty.hi:
                out(d, f"{r} = {v}")
            else:
                out(d, f"{r} = {_wrap(v, ty)}")
        elif op == "icmp":
            a = self.operand(ops[0], ty)
            c = self.operand(ops[1], ty)
            out(d, f"{r} = 1 if {a} {_CMP[ins.pred]} {c} else 0")
        elif op == "gep":
            base = self.operand(ops[0])
            terms = []
            for idx, stride in zip(ops[1:], (*ins.strides, 1)):
                v = self.operand(idx)
                terms.append(v if stride == 1 else f"{v} * {stride}")
            out(d, f"{r} = ({base} + ({' + '.join(terms)}) * {ty.size}) & {ADDR.mask}")
        elif op == "load":
            addr = self.address(out, d, b, ops[0], ty.size)
            out(d, f"{r} = {self.read('mem', addr, ty)}")
        elif op == "store":
            addr = self.address(out, d, b, ops[0], ty.size)
            v = self.operand(ops[1], ty)
            if ty.size == 1:
                out(d, f"mem[{addr}] = {v} & 255")
            else:
                out(d, f"mem[{addr}:{addr} + {ty.size}] = ({v} & {ty.mask}).to_bytes({ty.size}, 'little')")
        elif op == "input_read":
            lit = self.literal(ops[0])
            if lit is not None:
                out(d, f"if {lit + ty.size} > n:" if lit >= 0 else "if True:")
                idx = str(lit)
            else:
                out(d, f"_i = {self.operand(ops[0])}")
                out(d, f"if _i < 0 or _i + {ty.size} > n:")
                idx = "_i"
            out(d + 1, self.fault("oob-input", b))
            out(d, f"{r} = {self.read('data', idx, ty)}")
        elif op == "input_len":
            out(d, f"{r} = {_wrap('n', ty) if ty.bits < 64 or ty.signed else 'n'}")
        elif op == "call":
            callee = self.program.function(ins.callee)
            args = ", ".join(
                self.operand(o, pty) for o, (_, pty) in zip(ops, callee.params)
            )
            out(d, f"push(({self.f.name!r}, {b.label!r}))")
            call = f"f_{callee.name}({args})"
            out(d, f"{r} = {call}" if r is not None else call)
            out(d, "pop()")
        else:
            raise AssertionError(f"unexpected opcode {op}")

    def address(self, out: _Emitter, d: int, b: BasicBlock, op, size: int) -> str:
        lit = self.literal(op)
        limit = self.program.memory_size
        if lit is not None:
            if lit + size > limit:
                out(d, self.fault("oob-memory", b))
            return str(lit)
        out(d, f"_a = {self.operand(op)}")
        out(d, f"if _a + {size} > {limit}:")
        out(d + 1, self.fault("oob-memory", b))
        return "_a"

    @staticmethod
    def read(buf: str, idx: str, ty: ScalarType) -> str:
        if ty.size == 1 and not ty.signed:
            return f"{buf}[{idx}]"
        signed = ", signed=True" if ty.signed else ""
        return f"int.from_bytes({buf}[{idx}:{idx} + {ty.size}], 'little'{signed})"


def generate_source(program: Program, report=None, observe: bool = False) -> str:
    sites = report.by_ppt() if report is not None else {}
    reused = set()
    if report is not None:
        reused = {s.invariant.id for s in report.sites if not s.emitted_here}
    out = _Emitter()
    out(0, "def run(data, budget):")
    out(1, "mem = bytearray(MEM0)")
    out(1, "n = len(data)")
    out(1, "trace = []")
    out(1, "ap = trace.append")
    out(1, "stk = []")
    out(1, "push = stk.append")
    out(1, "pop = stk.pop")
    out(1, "obs = []")
    out(1, "rec = obs.append")
    out(1, "prev = 0")
    out(1, "steps = 0")
    for f in program.functions:
        _FunctionCompiler(program, f, sites, reused, observe).compile(out)
    entry = program.entry_function
    args = ", ".join("0" for _ in entry.params)
    out(1, "try:")
    out(2, f"value = f_{entry.name}({args})")
    out(1, "except TargetFault as e:")
    out(2, "return 'fault', steps, trace, (e, tuple(stk)), None, obs")
    out(1, "except Exhausted:")
    out(2, "return 'budget-exhausted', steps, trace, None, None, obs")
    out(1, "return 'ok', steps, trace, None, value, obs")
    return "\n".join(out.lines) + "\n"


class CompiledTarget:
    """An instrumented, directly executable form of ``program``.

    ``report`` selects the invariant checks (None for plain edge coverage);
    ``observe`` additionally records every check outcome.
    """

    def __init__(self, program: Program, report=None, observe: bool = False):
        self.program = program
        self.report = report
        self.observe = observe
        self.source = generate_source(program, report, observe)
        ns = {
            "MEM0": bytes(program.initial_memory()),
            "TargetFault": TargetFault,
            "Exhausted": Exhausted,
            "tdiv": trunc_div,
            "trem": trunc_rem,
        }
        exec(compile(self.source, f"<compiled {program.entry}>", "exec"), ns)
        self._run = ns["run"]

    def run(self, data: bytes, budget: int = DEFAULT_BUDGET) -> TargetResult:
        outcome, steps, trace, fault, value, obs = self._run(bytes(data), budget)
        res = TargetResult(outcome, steps, Counter(trace), None, value)
        if fault is not None:
            exc, callers = fault
            frames = (*callers, (exc.function, exc.block))
            res.fault = Fault(exc.kind, exc.function, exc.block, frames)
        if self.observe:
            res.outcomes = obs
        return res
