"""Dropping invariants that static ranges already guarantee."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from ..analysis.ranges import Interval, RangeMap
from .model import Invariant, holds


def _range(ranges: RangeMap, block: str, name: str) -> Optional[Interval]:
    if name not in ranges:
        return None
    return ranges.at(block, name)


def implied(inv: Invariant, ranges: RangeMap) -> bool:
    """True when every value allowed by ``ranges`` satisfies ``inv``."""
    ivs = [_range(ranges, inv.block, v) for v in inv.vars]
    if any(iv is None for iv in ivs):
        return False
    x = ivs[0]
    kind, params = inv.kind, inv.params
    if kind == "lower-bound":
        return x.lo >= params[0]
    if kind == "upper-bound":
        return x.hi <= params[0]
    if kind == "non-zero":
        return 0 not in x
    if kind == "const-equal":
        return x.is_const and x.lo == params[0]
    if kind == "one-of":
        return x.hi - x.lo < len(params) and all(
            v in params for v in range(int(x.lo), int(x.hi) + 1)
        )
    y = ivs[1]
    if kind == "le-vars":
        return x.hi <= y.lo
    # eq-vars and linear: only decidable here when both sides are fixed.
    if x.is_const and y.is_const:
        return holds(kind, params, (x.lo, y.lo))
    return False


def _lookup(ranges, function: str) -> Optional[RangeMap]:
    if isinstance(ranges, RangeMap):
        return ranges
    return ranges.get(function)


def prune_inviolable(
    invs: Sequence[Invariant], ranges: "RangeMap | Mapping[str, RangeMap]"
) -> list[Invariant]:
    """Invariants of ``invs`` that static ranges do not already imply.

    ``ranges`` is a single function's map or a map from function names.
    """
    out = []
    for inv in invs:
        rmap = _lookup(ranges, inv.function)
        if rmap is not None and implied(inv, rmap):
            continue
        out.append(inv)
    return out
