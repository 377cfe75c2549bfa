"""Queue of interesting inputs and the scheduling around it."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Sequence

from ..feedback.coverage import BUCKET_BIT, MAX_HITS, Novelty

SKIP_UNFAVORED = 0.9
REFAVOR_EVERY = 128
BASE_ITERATIONS = 64
MIN_ITERATIONS = 16
MAX_ITERATIONS = 1024


def coverage_signature(hits) -> frozenset:
    """(index, bucket bit) pairs of one execution."""
    return frozenset((i, BUCKET_BIT[min(c, MAX_HITS)]) for i, c in hits.items())


def short_hash(data: bytes) -> str:
    return hashlib.sha1(data).hexdigest()[:8]


@dataclass
class CorpusEntry:
    ordinal: int
    data: bytes
    steps: int
    novelty: Novelty
    signature: frozenset = frozenset()
    favored: bool = True

    @property
    def length(self) -> int:
        return len(self.data)

    @property
    def filename(self) -> str:
        return f"{self.ordinal:06d}-{short_hash(self.data)}"

    def cost(self) -> int:
        return max(self.steps, 1) * max(self.length, 1)


def greedy_cover(entries: Sequence[CorpusEntry]) -> list[CorpusEntry]:
    """Small subset of ``entries`` whose signatures cover all of theirs.

    Each round takes the entry adding the most uncovered elements; ties go
    to the cheaper entry (steps times length), then to the older one.
    """
    uncovered = set().union(*(e.signature for e in entries)) if entries else set()
    chosen = []
    remaining = list(entries)
    while uncovered:
        best = None
        best_key = None
        for e in remaining:
            gain = len(e.signature & uncovered)
            if gain == 0:
                continue
            key = (-gain, e.cost(), e.ordinal)
            if best_key is None or key < best_key:
                best, best_key = e, key
        chosen.append(best)
        remaining.remove(best)
        uncovered -= best.signature
    return chosen


class Corpus:
    def __init__(self):
        self.entries: list[CorpusEntry] = []
        self.cursor = 0
        self.since_refavor = 0
        self.total_steps = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def add(self, data: bytes, steps: int, novelty: Novelty, signature: frozenset) -> CorpusEntry:
        # New entries are favored until the next recomputation.
        e = CorpusEntry(len(self.entries), bytes(data), steps, novelty, signature)
        self.entries.append(e)
        self.total_steps += steps
        self.since_refavor += 1
        if self.since_refavor >= REFAVOR_EVERY:
            self.refavor()
        return e

    def refavor(self) -> None:
        keep = {e.ordinal for e in greedy_cover(self.entries)}
        for e in self.entries:
            e.favored = e.ordinal in keep
        self.since_refavor = 0

    @property
    def average_steps(self) -> float:
        return self.total_steps / len(self.entries) if self.entries else 1.0

    def pick(self, rng: random.Random) -> CorpusEntry:
        """Next queue entry, skipping unfavored ones most of the time."""
        if not self.entries:
            raise ValueError("empty corpus")
        any_favored = any(e.favored for e in self.entries)
        while True:
            e = self.entries[self.cursor]
            self.cursor = (self.cursor + 1) % len(self.entries)
            if any_favored and not e.favored and rng.random() < SKIP_UNFAVORED:
                continue
            return e


def pick_testcase(corpus: Corpus, rng: random.Random) -> CorpusEntry:
    return corpus.pick(rng)


def calibrate(entry: CorpusEntry, average_steps: float) -> int:
    """Mutation rounds for ``entry``: more for fast and novel entries."""
    speed = min(max(average_steps / max(entry.steps, 1), 0.25), 4.0)
    novelty = 1.0 + min(entry.novelty.new_buckets, 8) / 2
    n = int(BASE_ITERATIONS * speed * novelty)
    return min(max(n, MIN_ITERATIONS), MAX_ITERATIONS)

