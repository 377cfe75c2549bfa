"""Edge-coverage map, hit-count buckets and the novelty test."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from ..ir.model import MAP_SIZE

MAX_HITS = 255

# Upper bound (inclusive) of each hit-count bucket; bucket 0 is "never hit".
BUCKET_BOUNDS = (0, 1, 2, 3, 7, 15, 31, 127, 255)


def bucket(hits: int) -> int:
    """Index of the bucket holding ``hits`` (0..8)."""
    if not 0 <= hits <= MAX_HITS:
        raise ValueError(f"hit count {hits} outside 0..{MAX_HITS}")
    for i, top in enumerate(BUCKET_BOUNDS):
        if hits <= top:
            return i
    raise AssertionError


# Bit recorded in the virgin map for each possible counter value.
BUCKET_BIT = tuple(1 << bucket(h) for h in range(MAX_HITS + 1))


class CoverageMap:
    """65,536 saturating byte counters."""

    def __init__(self):
        self.counts = bytearray(MAP_SIZE)

    def bump(self, index: int) -> None:
        c = self.counts[index]
        if c < MAX_HITS:
            self.counts[index] = c + 1

    @classmethod
    def from_hits(cls, hits: Mapping[int, int]) -> "CoverageMap":
        m = cls()
        for i, c in hits.items():
            m.counts[i] = min(c, MAX_HITS)
        return m

    def hits(self) -> dict[int, int]:
        return {i: c for i, c in enumerate(self.counts) if c}

    def density(self) -> float:
        return sum(1 for c in self.counts if c) / MAP_SIZE

    def __eq__(self, other) -> bool:
        return isinstance(other, CoverageMap) and self.counts == other.counts


@dataclass
class Novelty:
    new_indices: int = 0  # indices never hit before
    new_buckets: int = 0  # (index, bucket) pairs never seen before

    @property
    def interesting(self) -> bool:
        return self.new_buckets > 0


@dataclass
class FeedbackState:
    prev_loc: int = 0
    virgin: list = field(default_factory=lambda: [0] * MAP_SIZE)

    def reset(self) -> None:
        """Start of an execution."""
        self.prev_loc = 0

    def seen_indices(self) -> int:
        return sum(1 for v in self.virgin if v)


def log_edge(fs: FeedbackState, cmap: CoverageMap, cur_loc: int) -> None:
    cmap.bump(cur_loc ^ fs.prev_loc)
    fs.prev_loc = cur_loc >> 1


def check_outcome(inv_id: int, holds: bool) -> int:
    return 0 if holds else inv_id << 1


def apply_check(fs: FeedbackState, inv, values: Sequence[int]) -> int:
    """Outcome word of ``inv`` on ``values``; the caller XORs it into prev_loc."""
    if len(values) != inv.arity:
        raise ValueError(f"{inv.kind} expects {inv.arity} value(s)")
    return check_outcome(inv.id, inv.holds(values))


def is_interesting(
    fs: FeedbackState, cmap: Union[CoverageMap, Mapping[int, int]]
) -> tuple[bool, Novelty]:
    """Whether the execution shows an unseen (index, bucket); absorbs it if so.

    ``cmap`` is either a full map or a sparse ``{index: hits}`` dict.
    """
    hits = cmap.hits() if isinstance(cmap, CoverageMap) else cmap
    virgin = fs.virgin
    nov = Novelty()
    for i, c in hits.items():
        bit = BUCKET_BIT[c if c < MAX_HITS else MAX_HITS]
        seen = virgin[i]
        if not seen & bit:
            if not seen:
                nov.new_indices += 1
            nov.new_buckets += 1
            virgin[i] = seen | bit
    return nov.interesting, nov
