"""Side-by-side campaigns of the two fuzzer configurations on the suite."""

from __future__ import annotations

import json
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .fuzzer import fuzz_loop
from .miner import mine
from .targets import Target

log = logging.getLogger(__name__)


@dataclass
class TrialResult:
    target: str
    trial: int
    rng_seed: int
    seed_corpus: int
    invariants: int
    bugs: dict  # mode -> sorted crash hash strings
    execs: dict  # mode -> executions run
    execs_per_sec: dict  # mode -> wall-clock rate
    planted_found: dict  # mode -> execution index of the first planted crash, or None

    @property
    def intersection(self) -> list[str]:
        return sorted(set(self.bugs["edge-only"]) & set(self.bugs["invscov"]))

    @property
    def overhead(self) -> float:
        inv = self.execs_per_sec["invscov"]
        return self.execs_per_sec["edge-only"] / inv if inv else float("inf")


def run_trial(
    target: Target,
    trial: int,
    rng_seed: int,
    seed_budget: int,
    budget: int,
    stop_on_planted: bool = False,
) -> TrialResult:
    """Seed run, invariant mining, then one campaign per configuration.

    With ``stop_on_planted`` a campaign ends as soon as it hits a planted
    fault; everything up to that point is identical to a full run.
    """
    program = target.program
    planted = target.planted_hashes()
    seed_run = fuzz_loop(program, target.seeds, None, seed_budget, rng_seed)
    corpus = [e.data for e in seed_run.corpus] or list(target.seeds)
    mined = mine(program, corpus)

    def hit_planted(campaign) -> bool:
        return bool(planted & campaign.crashes.hashes())

    stop = hit_planted if stop_on_planted else None
    bugs, execs, rates, found = {}, {}, {}, {}
    for mode, report in (("edge-only", None), ("invscov", mined.report)):
        res = fuzz_loop(program, corpus, report, budget, rng_seed, stop=stop)
        bugs[mode] = sorted(c.name for c in res.crashes)
        execs[mode] = res.stats.executions
        rates[mode] = res.execs_per_sec
        hits = [c.execution for c in res.crashes if c.hash in planted]
        found[mode] = min(hits) if hits else None
    return TrialResult(
        target.name,
        trial,
        rng_seed,
        len(corpus),
        len(mined.kept),
        bugs,
        execs,
        rates,
        found,
    )


@dataclass
class TargetSummary:
    target: str
    trials: list = field(default_factory=list)

    def median(self, fn) -> float:
        return statistics.median(fn(t) for t in self.trials)

    @property
    def edge_bugs(self) -> float:
        return self.median(lambda t: len(t.bugs["edge-only"]))

    @property
    def invscov_bugs(self) -> float:
        return self.median(lambda t: len(t.bugs["invscov"]))

    @property
    def intersection(self) -> float:
        return self.median(lambda t: len(t.intersection))

    @property
    def overhead(self) -> float:
        return self.median(lambda t: t.overhead)


def run_bench(
    targets: Sequence[Target],
    trials: int,
    seed_budget: int,
    budget: int,
    base_seed: int = 0,
    out: Optional[Path] = None,
) -> list[TargetSummary]:
    summaries = []
    for target in targets:
        s = TargetSummary(target.name)
        for t in range(trials):
            log.info("bench %s trial %d", target.name, t)
            s.trials.append(run_trial(target, t, base_seed + t, seed_budget, budget))
        summaries.append(s)
    if out is not None:
        write_bench(summaries, Path(out))
    return summaries


def suite_overhead(summaries: Sequence[TargetSummary]) -> float:
    return statistics.median(s.overhead for s in summaries)


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.1f}"


def format_table(summaries: Sequence[TargetSummary]) -> str:
    header = ("target", "edge-only bugs", "invscov bugs", "intersection", "overhead")
    rows = [
        (s.target, _num(s.edge_bugs), _num(s.invscov_bugs), _num(s.intersection), f"{s.overhead:.2f}x")
        for s in summaries
    ]
    widths = [max(len(r[i]) for r in (header, *rows)) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in (header, *rows)]
    lines.append("")
    lines.append(f"suite median overhead: {suite_overhead(summaries):.2f}x")
    return "\n".join(lines) + "\n"


def write_bench(summaries: Sequence[TargetSummary], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(format_table(summaries))
    data = {
        "suite_median_overhead": round(suite_overhead(summaries), 3),
        "targets": [
            {
                "target": s.target,
                "edge_only_bugs": s.edge_bugs,
                "invscov_bugs": s.invscov_bugs,
                "intersection": s.intersection,
                "overhead": round(s.overhead, 3),
                "trials": [
                    {
                        "trial": t.trial,
                        "rng_seed": t.rng_seed,
                        "seed_corpus": t.seed_corpus,
                        "invariants": t.invariants,
                        "bugs": t.bugs,
                        "executions": t.execs,
                        "execs_per_sec": {k: round(v, 1) for k, v in t.execs_per_sec.items()},
                        "planted_found_at": t.planted_found,
                    }
                    for t in s.trials
                ],
            }
            for s in summaries
        ],
    }
    (out / "bench.json").write_text(json.dumps(data, indent=1) + "\n")

