"""The evolutionary fuzzing loop."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..feedback.coverage import MAP_SIZE, FeedbackState, is_interesting
from ..feedback.target import CompiledTarget
from ..interp.callstack import callstack_hash, format_hash
from ..interp.interpreter import Fault
from ..ir.model import Program
from .corpus import Corpus, calibrate, coverage_signature
from .mutate import MAX_INPUT, mutate

STEP_LIMIT = 100_000  # per execution
STATS_WINDOW = 1000  # executions per stats record


@dataclass(frozen=True)
class Crash:
    hash: int
    data: bytes
    kind: str
    frames: tuple
    execution: int  # 1-based index of the execution that found it

    @property
    def name(self) -> str:
        return format_hash(self.hash)


class CrashSet:
    """One representative input per call-stack hash; the first one wins."""

    def __init__(self):
        self.crashes: dict[int, Crash] = {}

    def __len__(self) -> int:
        return len(self.crashes)

    def __contains__(self, h: int) -> bool:
        return h in self.crashes

    def __iter__(self):
        return iter(self.crashes.values())

    def hashes(self) -> set[int]:
        return set(self.crashes)

    def add(self, fault: Fault, data: bytes, execution: int) -> bool:
        h = callstack_hash(fault.frames)
        if h in self.crashes:
            return False
        self.crashes[h] = Crash(h, bytes(data), fault.kind, fault.frames, execution)
        return True


@dataclass
class CampaignStats:
    executions: int = 0
    faults: int = 0
    timeouts: int = 0
    corpus_size: int = 0
    seen_indices: int = 0
    unique_bugs: int = 0
    series: list = field(default_factory=list)

    @property
    def map_density(self) -> float:
        return self.seen_indices / MAP_SIZE

    def snapshot(self) -> dict:
        return {
            "executions": self.executions,
            "corpus": self.corpus_size,
            "map_density": round(self.map_density, 6),
            "faults": self.faults,
            "unique_bugs": self.unique_bugs,
            "timeouts": self.timeouts,
        }

    def totals(self) -> dict:
        return self.snapshot()


@dataclass
class CampaignResult:
    corpus: Corpus
    crashes: CrashSet
    stats: CampaignStats
    elapsed: float
    rates: list  # execs/sec per stats window (wall clock)

    @property
    def execs_per_sec(self) -> float:
        return self.stats.executions / self.elapsed if self.elapsed > 0 else 0.0


class Campaign:
    """State of one fuzzing campaign over ``program``.

    ``report`` holds the invariant checks to compile in; None gives the
    plain edge-coverage fuzzer.
    """

    def __init__(
        self,
        program: Program,
        report=None,
        rng_seed: int = 0,
        step_limit: int = STEP_LIMIT,
        window: int = STATS_WINDOW,
        max_len: int = MAX_INPUT,
        target: Optional[CompiledTarget] = None,
    ):
        self.program = program
        self.target = target or CompiledTarget(program, report)
        self.rng = random.Random(rng_seed)
        self.fs = FeedbackState()
        self.corpus = Corpus()
        self.crashes = CrashSet()
        self.stats = CampaignStats()
        self.step_limit = step_limit
        self.window = window
        self.max_len = max_len
        self.fault_log: Optional[list] = None
        self._rates: list[float] = []
        self._mark = (0, time.perf_counter())

    def evaluate(self, data: bytes) -> str:
        """Run one input and fold the outcome into the campaign state."""
        res = self.target.run(data, self.step_limit)
        st = self.stats
        st.executions += 1
        outcome = res.outcome
        if outcome == "fault":
            st.faults += 1
            if self.fault_log is not None:
                self.fault_log.append(res.fault)
            if self.crashes.add(res.fault, data, st.executions):
                st.unique_bugs += 1
                outcome = "new-crash"
        elif outcome == "budget-exhausted":
            st.timeouts += 1
        else:
            new, nov = is_interesting(self.fs, res.hits)
            if new:
                st.seen_indices += nov.new_indices
                self.corpus.add(data, res.steps, nov, coverage_signature(res.hits))
                st.corpus_size = len(self.corpus)
                outcome = "interesting"
        if st.executions % self.window == 0:
            self._record()
        return outcome

    def _record(self) -> None:
        self.stats.series.append(self.stats.snapshot())
        now = time.perf_counter()
        execs, then = self._mark
        dt = now - then
        self._rates.append((self.stats.executions - execs) / dt if dt > 0 else 0.0)
        self._mark = (self.stats.executions, now)

    def run(
        self,
        seeds: Sequence[bytes],
        budget: int,
        stop: Optional[Callable[["Campaign"], bool]] = None,
    ) -> CampaignResult:
        """Fuzz for ``budget`` executions (seed executions included).

        ``stop`` is polled after each execution; returning True ends the
        campaign early without changing anything that happened before.
        """
        if budget <= 0:
            raise ValueError("budget must be positive")
        if not seeds:
            raise ValueError("seed corpus is empty")
        start = time.perf_counter()
        self._mark = (self.stats.executions, start)
        st = self.stats
        done = False
        for s in seeds:
            if st.executions >= budget:
                break
            self.evaluate(s)
            if stop is not None and stop(self):
                done = True
                break
        rng = self.rng
        while not done and st.executions < budget:
            if self.corpus.entries:
                entry = self.corpus.pick(rng)
                parent = entry.data
                rounds = calibrate(entry, self.corpus.average_steps)
            else:
                # Nothing interesting yet (e.g. every seed crashes).
                parent = seeds[rng.randrange(len(seeds))]
                rounds = 16
            for _ in range(rounds):
                if st.executions >= budget:
                    break
                other = None
                if self.corpus.entries:
                    other = self.corpus.entries[rng.randrange(len(self.corpus))].data
                self.evaluate(mutate(parent, rng, other, self.max_len))
                if stop is not None and stop(self):
                    done = True
                    break
        if not st.series or st.series[-1]["executions"] != st.executions:
            self._record()
        elapsed = time.perf_counter() - start
        return CampaignResult(self.corpus, self.crashes, st, elapsed, list(self._rates))


def fuzz_loop(
    program: Program,
    seeds: Sequence[bytes],
    invariants=None,
    budget: int = 10_000,
    rng_seed: int = 0,
    **kw,
) -> CampaignResult:
    """Run a campaign; ``invariants`` is an InvariantSetReport or None."""
    stop = kw.pop("stop", None)
    return Campaign(program, invariants, rng_seed, **kw).run(seeds, budget, stop)
