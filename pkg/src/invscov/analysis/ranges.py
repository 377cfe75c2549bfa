"""Conservative value-range analysis over SSA functions.

Every value gets one interval for its definition; uses inside blocks that
are dominated by a branch on ``icmp value, literal`` additionally see the
intersection with the branch condition. Ascending iteration joins with the
previous interval and widens a bound to the type limit after
``WIDEN_AFTER`` increases; a few descending rounds then recover precision
lost to widening.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from ..ir.cfg import build_cfg, dominator_tree
from ..ir.model import Function, Global, Instruction
from ..interp.semantics import trunc_div
from ..ir.types import ADDR, ScalarType

WIDEN_AFTER = 3
NARROW_ROUNDS = 3

Bound = Union[int, float]


@dataclass(frozen=True)
class Interval:
    lo: Bound
    hi: Bound

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def const(cls, v: int) -> "Interval":
        return cls(v, v)

    @classmethod
    def of_type(cls, ty: ScalarType) -> "Interval":
        return cls(ty.lo, ty.hi)

    @classmethod
    def top(cls) -> "Interval":
        return cls(-math.inf, math.inf)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def meet(self, other: "Interval") -> Optional["Interval"]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def __contains__(self, v) -> bool:
        return self.lo <= v <= self.hi

    def within(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    @property
    def is_const(self) -> bool:
        return self.lo == self.hi

    def __add__(self, o: "Interval") -> "Interval":
        return Interval(self.lo + o.lo, self.hi + o.hi)

    def __sub__(self, o: "Interval") -> "Interval":
        return Interval(self.lo - o.hi, self.hi - o.lo)

    def __mul__(self, o: "Interval") -> "Interval":
        corners = [_mul(a, b) for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return Interval(min(corners), max(corners))

    def scale(self, a: int, b: int = 0) -> "Interval":
        """The interval of ``a * x + b``."""
        return self * Interval.const(a) + Interval.const(b)

    def to_json(self) -> list:
        return [_json_bound(self.lo), _json_bound(self.hi)]

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _mul(a: Bound, b: Bound) -> Bound:
    if a == 0 or b == 0:
        return 0
    return a * b


def _json_bound(b: Bound):
    if b == math.inf:
        return "+inf"
    if b == -math.inf:
        return "-inf"
    return int(b)


def fit(iv: Optional[Interval], ty: ScalarType) -> Optional[Interval]:
    """Interval of a wrapped result: unchanged if no wrap is possible."""
    if iv is None:
        return None
    if ty.lo <= iv.lo and iv.hi <= ty.hi:
        return iv
    return Interval.of_type(ty)


def hull(a: Optional[Interval], b: Optional[Interval]) -> Optional[Interval]:
    if a is None:
        return b
    if b is None:
        return a
    return a.hull(b)


class RangeMap:
    """Per-value intervals, plus branch-refined intervals per block."""

    def __init__(
        self,
        ranges: dict[str, Interval],
        refinements: dict[int, dict[str, Interval]],
        labels: Optional[dict[str, int]] = None,
    ):
        self.ranges = ranges
        self.refinements = refinements
        self.labels = labels or {}

    def __getitem__(self, name: str) -> Interval:
        return self.ranges[name]

    def __contains__(self, name: str) -> bool:
        return name in self.ranges

    def get(self, name: str) -> Optional[Interval]:
        return self.ranges.get(name)

    def at(self, block, name: str) -> Interval:
        """Interval of ``name`` inside ``block`` (an id or a label)."""
        block_id = self.labels[block] if isinstance(block, str) else block
        base = self.ranges[name]
        ref = self.refinements.get(block_id, {}).get(name)
        if ref is None:
            return base
        return base.meet(ref) or base

    def items(self):
        return self.ranges.items()


# --- branch refinements -----------------------------------------------------

_FLIP = {"lt": "gt", "le": "ge", "gt": "lt", "ge": "le", "eq": "eq", "ne": "ne"}
_NEGATE = {"lt": "ge", "le": "gt", "gt": "le", "ge": "lt", "eq": "ne", "ne": "eq"}


def _constraint(pred: str, k: int, ty: ScalarType) -> Optional[Interval]:
    """Interval of ``x`` satisfying ``x <pred> k``."""
    if pred == "lt":
        return Interval(ty.lo, k - 1) if k - 1 >= ty.lo else None
    if pred == "le":
        return Interval(ty.lo, k)
    if pred == "gt":
        return Interval(k + 1, ty.hi) if k + 1 <= ty.hi else None
    if pred == "ge":
        return Interval(k, ty.hi)
    if pred == "eq":
        return Interval(k, k)
    return None  # "ne" gives no interval


def _branch_facts(f: Function, ins: Instruction) -> list[tuple[int, str, Interval]]:
    """(successor id, value, interval) facts implied by taking each edge."""
    cond = ins.operands[0]
    if not isinstance(cond, str):
        return []
    d = f.definitions.get(cond)
    if d is None or d.opcode != "icmp":
        return []
    a, b = d.operands
    if isinstance(a, str) and isinstance(b, int):
        var, k, pred = a, d.type.wrap(b), d.pred
    elif isinstance(b, str) and isinstance(a, int):
        var, k, pred = b, d.type.wrap(a), _FLIP[d.pred]
    else:
        return []
    if f.value_types.get(var) != d.type:
        return []
    ids = f.label_to_id()
    facts = []
    for label, p in ((ins.labels[0], pred), (ins.labels[1], _NEGATE[pred])):
        iv = _constraint(p, k, d.type)
        if iv is not None:
            facts.append((ids[label], var, iv))
    return facts


def _refinements(f: Function, cfg, dom) -> dict[int, dict[str, Interval]]:
    edge_facts: dict[int, dict[str, Interval]] = {}
    for b in f.blocks:
        t = b.terminator
        if b.id not in dom.idom or t is None or t.opcode != "br":
            continue
        for succ, var, iv in _branch_facts(f, t):
            # the fact holds in blocks dominated by succ only if the edge is
            # the unique way into succ
            if cfg.pred[succ] == [b.id]:
                cur = edge_facts.setdefault(succ, {})
                cur[var] = cur[var].meet(iv) or cur[var] if var in cur else iv
    out: dict[int, dict[str, Interval]] = {}
    for node in dom.idom:
        facts: dict[str, Interval] = {}
        for d in [node, *dom.ancestors(node)]:
            for var, iv in edge_facts.get(d, {}).items():
                facts[var] = facts[var].meet(iv) or facts[var] if var in facts else iv
        if facts:
            out[node] = facts
    return out


# --- transfer functions -----------------------------------------------------


def _div(a: Interval, b: Interval, ty: ScalarType) -> Interval:
    if b.lo > 0 or b.hi < 0:
        corners = [trunc_div(x, y) for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
        return fit(Interval(min(corners), max(corners)), ty)
    m = max(abs(a.lo), abs(a.hi))
    return fit(Interval(0 if ty.signed is False else -m, m), ty)


def _rem(a: Interval, b: Interval, ty: ScalarType) -> Interval:
    m = max(abs(b.lo), abs(b.hi)) - 1
    if m < 0:
        return Interval.of_type(ty)
    lo = 0 if a.lo >= 0 else max(a.lo, -m)
    hi = 0 if a.hi <= 0 else min(a.hi, m)
    return Interval(lo, hi)


def _bitwise(op: str, a: Interval, b: Interval, ty: ScalarType) -> Interval:
    if op == "and":
        if a.lo >= 0 and b.lo >= 0:
            return Interval(0, min(a.hi, b.hi))
        if a.lo >= 0:
            return Interval(0, a.hi)
        if b.lo >= 0:
            return Interval(0, b.hi)
        return Interval.of_type(ty)
    if a.lo >= 0 and b.lo >= 0:
        top = (1 << max(int(a.hi).bit_length(), int(b.hi).bit_length())) - 1
        lo = max(a.lo, b.lo) if op == "or" else 0
        return fit(Interval(lo, top), ty)
    return Interval.of_type(ty)


def _shift(op: str, a: Interval, b: Interval, ty: ScalarType) -> Interval:
    if b.is_const:
        k = int(b.lo) & (ty.bits - 1)
        if op == "shl":
            return fit(a.scale(1 << k), ty)
        return Interval(int(a.lo) >> k, int(a.hi) >> k)
    if op == "shr":
        if a.lo >= 0:
            return Interval(0, a.hi)
        return Interval(a.lo, max(a.hi, 0))
    return Interval.of_type(ty)


def transfer(ins: Instruction, args: list[Interval], ty: ScalarType) -> Interval:
    op = ins.opcode
    if op == "const":
        return Interval.const(ty.wrap(ins.operands[0]))
    if op == "add":
        return fit(args[0] + args[1], ty)
    if op == "sub":
        return fit(args[0] - args[1], ty)
    if op == "mul":
        return fit(args[0] * args[1], ty)
    if op == "div":
        return _div(args[0], args[1], ty)
    if op == "rem":
        return _rem(args[0], args[1], ty)
    if op in ("and", "or", "xor"):
        return _bitwise(op, args[0], args[1], ty)
    if op in ("shl", "shr"):
        return _shift(op, args[0], args[1], ty)
    if op == "neg":
        return fit(args[0].scale(-1), ty)
    if op == "not":
        return fit(args[0].scale(-1, -1), ty)
    if op == "cast":
        return fit(args[0], ty)
    if op == "icmp":
        return Interval(0, 1)
    if op == "gep":
        total = args[0]
        strides = (*ins.strides, 1)
        for iv, stride in zip(args[1:], strides):
            total = total + iv.scale(stride * ins.type.size)
        return fit(total, ADDR)
    # load, call, input_read, input_len: anything representable
    return Interval.of_type(ty)


def compute_ranges(f: Function, global_addresses: Optional[dict[str, int]] = None) -> RangeMap:
    """Sound intervals for every value of ``f``.

    ``global_addresses`` maps global names to their addresses; unknown
    globals are treated as arbitrary addresses.
    """
    cfg = build_cfg(f)
    live = cfg.restrict(cfg.reachable())
    dom = dominator_tree(live)
    refine = _refinements(f, live, dom)
    rpo = live.reverse_postorder()
    types = f.value_types
    state: dict[str, Optional[Interval]] = {n: Interval.of_type(t) for n, t in f.params}
    grown: dict[str, int] = {}
    blocks = {b.id: b for b in f.blocks}
    ids = f.label_to_id()

    def operand(op, block_id: int, ctx: Optional[ScalarType]) -> Optional[Interval]:
        if isinstance(op, str):
            iv = state.get(op)
            if iv is None:
                return None
            r = refine.get(block_id, {}).get(op)
            return iv if r is None else iv.meet(r)
        if isinstance(op, Global):
            addr = (global_addresses or {}).get(op.name)
            return Interval.of_type(ADDR) if addr is None else Interval.const(addr)
        return Interval.const(ctx.wrap(op) if ctx is not None else op)

    def evaluate(ins: Instruction, block_id: int) -> Optional[Interval]:
        ty = types[ins.result]
        if ins.opcode == "phi":
            out = None
            for v, lab in zip(ins.operands, ins.labels):
                if ids[lab] in live.succ:
                    out = hull(out, operand(v, ids[lab], ins.type))
            return out
        if ins.opcode in ("load", "call", "input_read", "input_len", "const"):
            return transfer(ins, [], ty)
        if ins.opcode == "cast":
            ctx = None
        elif ins.opcode == "gep":
            ctx = None
        else:
            ctx = ins.type
        args = [operand(o, block_id, ctx) for o in ins.operands]
        if any(a is None for a in args):
            return None
        return transfer(ins, args, ty)

    def sweep(narrow: bool) -> bool:
        changed = False
        for bid in rpo:
            for ins in blocks[bid].body:
                if ins.result is None:
                    continue
                new = evaluate(ins, bid)
                old = state.get(ins.result)
                if narrow:
                    if new is not None and old is not None:
                        new = new.meet(old) or old
                    if new != old and new is not None:
                        state[ins.result] = new
                        changed = True
                    continue
                new = hull(old, new)
                if new == old:
                    continue
                n = grown[ins.result] = grown.get(ins.result, 0) + 1
                if old is not None and n > WIDEN_AFTER:
                    ty = types[ins.result]
                    new = Interval(
                        ty.lo if new.lo < old.lo else new.lo,
                        ty.hi if new.hi > old.hi else new.hi,
                    )
                state[ins.result] = new
                changed = True
        return changed

    while sweep(narrow=False):
        pass
    for _ in range(NARROW_ROUNDS):
        if not sweep(narrow=True):
            break

    ranges = {
        n: (state.get(n) or Interval.of_type(t)) for n, t in types.items()
    }
    return RangeMap(ranges, refine, ids)


def compute_program_ranges(program) -> dict[str, RangeMap]:
    addrs = {name: g.address for name, g in program.globals.items()}
    return {f.name: compute_ranges(f, addrs) for f in program.functions}
