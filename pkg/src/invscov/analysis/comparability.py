"""Comparability classes of IR values.

Values start in the universal class (``None``, comparable with every
other value); arithmetic, casts and address computations merge the classes
of the values they relate, and every load result gets a class of its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..ir.model import BINARY_OPS, UNARY_OPS, Function

EPSILON = None
DAIKON_EPSILON = -1


@dataclass
class ComparabilityMap:
    assignment: dict[str, Optional[int]] = field(default_factory=dict)

    def get(self, name: str) -> Optional[int]:
        return self.assignment.get(name)

    def comparable(self, a: str, b: str) -> bool:
        ca, cb = self.get(a), self.get(b)
        return ca is None or cb is None or ca == cb

    def daikon_id(self, name: str) -> int:
        c = self.get(name)
        return DAIKON_EPSILON if c is None else c

    def classes(self) -> list[set[str]]:
        groups: dict[int, set[str]] = {}
        for name, c in self.assignment.items():
            if c is not None:
                groups.setdefault(c, set()).add(name)
        return sorted(groups.values(), key=lambda g: sorted(g))

    def to_json(self) -> dict[str, int]:
        return {n: self.daikon_id(n) for n in self.assignment}


def merge_comparability(
    c: dict[str, Optional[int]], counter: int, v1: str, v2: str
) -> tuple[dict[str, Optional[int]], int]:
    """Merge the classes of ``v1`` and ``v2``; updates ``c`` in place.

    If only one side has a class the other adopts it; two unclassified
    values share a fresh id; two classified values are unified by
    relabelling every member of ``v2``'s class.
    """
    c1, c2 = c.get(v1), c.get(v2)
    if c1 is not None and c2 is None:
        c[v2] = c1
    elif c1 is None and c2 is not None:
        c[v1] = c2
    elif c1 is None and c2 is None:
        c[v1] = counter
        c[v2] = counter
        counter += 1
    elif c1 != c2:
        for v, cv in c.items():
            if cv == c2:
                c[v] = c1
    return c, counter


def compute_comparability(f: Function) -> ComparabilityMap:
    c: dict[str, Optional[int]] = {name: None for name, _ in f.params}
    for ins in f.instructions():
        if ins.result is not None:
            c.setdefault(ins.result, None)
    counter = 1

    def merge(a, b):
        nonlocal counter
        if isinstance(a, str) and isinstance(b, str) and a != b:
            _, counter = merge_comparability(c, counter, a, b)

    for ins in f.instructions():
        op = ins.opcode
        if op in UNARY_OPS or op == "cast":
            merge(ins.result, ins.operands[0])
        elif op in BINARY_OPS:
            merge(ins.result, ins.operands[0])
            merge(ins.result, ins.operands[1])
        elif op == "gep":
            merge(ins.result, ins.operands[0])
            first = ins.operands[1]
            for other in ins.operands[2:]:
                merge(first, other)
        elif op == "load":
            if c.get(ins.result) is None:
                c[ins.result] = counter
                counter += 1
    return ComparabilityMap(c)
