"""Single-pass invariant learning over a block-state record stream."""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence

from ..analysis.comparability import ComparabilityMap
from .model import MAX_ID, BlockStateRecord, Invariant

MIN_SAMPLES = 5
MAX_ONE_OF = 3
MAX_COEFF = 1 << 15
CAP_PER_BLOCK = 16


def pair_eligible(ca: Optional[int], cb: Optional[int]) -> bool:
    """Binary templates need a shared class, or the universal class on one side."""
    if ca is None and cb is None:
        return False
    return ca is None or cb is None or ca == cb


class _Linear:
    """Tracks whether y == a*x + b holds, fitting a, b from two distinct x."""

    __slots__ = ("alive", "first", "coef")

    def __init__(self):
        self.alive = True
        self.first = None
        self.coef = None

    def add(self, x: int, y: int) -> None:
        if not self.alive:
            return
        if self.coef is not None:
            a, b = self.coef
            if y != a * x + b:
                self.alive = False
            return
        if self.first is None:
            self.first = (x, y)
            return
        x0, y0 = self.first
        if x == x0:
            if y != y0:
                self.alive = False
            return
        dx, dy = x - x0, y - y0
        if dy % dx:
            self.alive = False
            return
        a = dy // dx
        b = y0 - a * x0
        if abs(a) > MAX_COEFF or abs(b) > MAX_COEFF:
            self.alive = False
            return
        self.coef = (a, b)

    def result(self):
        if self.alive and self.coef is not None:
            a, b = self.coef
            if a != 0 and (a, b) != (1, 0):
                return self.coef
        return None


class _Pair:
    __slots__ = ("i", "j", "eq", "le", "ge", "fwd", "back")

    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        self.eq = self.le = self.ge = True
        self.fwd = _Linear()  # vars[j] = a * vars[i] + b
        self.back = _Linear()  # vars[i] = a * vars[j] + b

    def add(self, x: int, y: int) -> None:
        if x != y:
            self.eq = False
            if x > y:
                self.le = False
            else:
                self.ge = False
        self.fwd.add(x, y)
        self.back.add(y, x)


class _PointState:
    """Running summary of one program point."""

    def __init__(self, names: tuple, comp: ComparabilityMap):
        self.names = names
        self.count = 0
        k = len(names)
        self.lo = [None] * k
        self.hi = [None] * k
        self.seen: list = [set() for _ in range(k)]
        self.zero = [False] * k
        self.pairs = [
            _Pair(i, j)
            for i in range(k)
            for j in range(i + 1, k)
            if pair_eligible(comp.get(names[i]), comp.get(names[j]))
        ]

    def add(self, values: Sequence[int]) -> None:
        self.count += 1
        for i, v in enumerate(values):
            if self.lo[i] is None or v < self.lo[i]:
                self.lo[i] = v
            if self.hi[i] is None or v > self.hi[i]:
                self.hi[i] = v
            seen = self.seen[i]
            if seen is not None:
                seen.add(v)
                if len(seen) > MAX_ONE_OF:
                    self.seen[i] = None
            if v == 0:
                self.zero[i] = True
        for p in self.pairs:
            p.add(values[p.i], values[p.j])

    def templates(self) -> list[tuple[str, tuple, tuple]]:
        out = []
        for i, name in enumerate(self.names):
            seen = self.seen[i]
            if seen is not None and len(seen) == 1:
                out.append(("const-equal", (name,), (self.lo[i],)))
                continue
            if seen is not None:
                out.append(("one-of", (name,), tuple(sorted(seen))))
            out.append(("lower-bound", (name,), (self.lo[i],)))
            out.append(("upper-bound", (name,), (self.hi[i],)))
            if seen is None and not self.zero[i] and self.lo[i] < 0 < self.hi[i]:
                out.append(("non-zero", (name,), ()))
        for p in self.pairs:
            x, y = self.names[p.i], self.names[p.j]
            if p.eq:
                out.append(("eq-vars", (x, y), ()))
                continue
            if p.le:
                out.append(("le-vars", (x, y), ()))
            if p.ge:
                out.append(("le-vars", (y, x), ()))
            fwd = p.fwd.result()
            if fwd is not None:
                out.append(("linear", (x, y), fwd))
            back = p.back.result()
            # y = ±x + b and x = ±y ∓ b say the same thing.
            if back is not None and not (fwd is not None and abs(fwd[0]) == 1):
                out.append(("linear", (y, x), back))
        return out


def learn_invariants(
    records: Iterable[BlockStateRecord],
    comp: Mapping[str, ComparabilityMap],
    min_samples: int = MIN_SAMPLES,
    order: Optional[Sequence[str]] = None,
) -> list[Invariant]:
    """Templates never falsified by ``records``, at points with enough samples.

    ``comp`` maps function names to comparability maps. Ids are assigned
    densely from 1 in ``order`` (a list of ppt names), falling back to the
    order in which points first appear in the stream.
    """
    points: dict[str, tuple[str, str, _PointState]] = {}
    for rec in records:
        entry = points.get(rec.ppt)
        if entry is None:
            cmap = comp.get(rec.function) or ComparabilityMap()
            entry = (rec.function, rec.block, _PointState(rec.names, cmap))
            points[rec.ppt] = entry
        state = entry[2]
        if len(rec.observations) != len(state.names):
            raise ValueError(f"inconsistent variable list for {rec.ppt}")
        state.add(rec.values)

    ppts = list(points)
    if order is not None:
        rank = {p: i for i, p in enumerate(order)}
        ppts.sort(key=lambda p: rank.get(p, len(rank)))

    out: list[Invariant] = []
    for ppt in ppts:
        fn, block, state = points[ppt]
        if state.count < min_samples:
            continue
        for kind, vars, params in state.templates():
            if len(out) >= MAX_ID:
                raise ValueError("too many invariants for 15-bit identifiers")
            out.append(Invariant(len(out) + 1, fn, block, kind, vars, params, state.count))
    return out


def cap_invariants(invs: Sequence[Invariant], limit: int = CAP_PER_BLOCK) -> list[Invariant]:
    """Keep at most ``limit`` invariants per point, binary kinds first."""
    by_ppt: dict[str, list[Invariant]] = {}
    for inv in invs:
        by_ppt.setdefault(inv.ppt, []).append(inv)
    keep = set()
    for group in by_ppt.values():
        ranked = sorted(group, key=lambda v: (-v.arity, -v.samples, v.id))
        keep.update(v.id for v in ranked[:limit])
    return [v for v in invs if v.id in keep]
