"""Pipeline stages shared by the command line and the benchmark harness.

A run directory holds every artifact::

    RUN/dump/program.decls   RUN/dump/program.dtrace   RUN/dump/analysis.json
    RUN/learn/invariants.json   RUN/learn/report.txt   RUN/learn/summary.json
    RUN/fuzz-<mode>/corpus/   RUN/fuzz-<mode>/crashes/   RUN/fuzz-<mode>/stats.jsonl
    RUN/fuzz-<mode>/timing.json   RUN/fuzz-<mode>/summary.json
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .analysis import ProgramAnalysis
from .fuzzer import CampaignResult, fuzz_loop
from .ir.model import Program
from .miner import (
    InvariantSetReport,
    MiningResult,
    comparability_from_decls,
    mine_records,
    parse_decls,
    parse_dtrace,
    record_traces,
    write_decls,
    write_dtrace,
)
from .targets import parse_directives

log = logging.getLogger(__name__)

MODES = ("edge-only", "invscov")


class PipelineError(Exception):
    """A stage could not run; reported with exit status 2."""


@dataclass
class PipelineConfig:
    program: Path
    out_dir: Path
    corpus_dir: Optional[Path] = None
    seed_budget: int = 5_000
    budget: int = 20_000
    rng_seed: int = 0
    mode: str = "invscov"
    trials: int = 1
    dedup: bool = True

    def __post_init__(self):
        if self.seed_budget <= 0 or self.budget <= 0:
            raise ValueError("budgets must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")


def read_corpus(path: Path) -> list[bytes]:
    path = Path(path)
    if not path.is_dir():
        raise PipelineError(f"corpus directory {path} does not exist")
    items = [p.read_bytes() for p in sorted(path.iterdir()) if p.is_file()]
    if not items:
        raise PipelineError(f"corpus empty: {path}")
    return items


def default_seeds(program: Program) -> list[bytes]:
    """Seeds declared in the program's header comments, else one empty input."""
    return parse_directives(program.source or "").seeds


# --- dump -------------------------------------------------------------------


def dump(program: Program, corpus: Sequence[bytes], out: Path) -> dict:
    out = Path(out) / "dump"
    out.mkdir(parents=True, exist_ok=True)
    analysis = ProgramAnalysis(program)
    (out / "program.decls").write_text(
        write_decls(program, analysis.dump, analysis.comparability)
    )
    with open(out / "program.dtrace", "w") as fh:
        records = write_dtrace(record_traces(program, corpus, analysis.dump), fh)
    (out / "analysis.json").write_text(json.dumps(analysis.describe(), indent=1))
    return {"inputs": len(corpus), "records": records}


# --- learn ------------------------------------------------------------------


def learn(program: Program, run: Path, dedup: bool = True) -> MiningResult:
    run = Path(run)
    decls_path = run / "dump" / "program.decls"
    dtrace_path = run / "dump" / "program.dtrace"
    for p in (decls_path, dtrace_path):
        if not p.exists():
            raise PipelineError(f"missing {p}; run the dump stage first")
    comp = comparability_from_decls(parse_decls(decls_path.read_text()))
    with open(dtrace_path) as fh:
        result = mine_records(program, parse_dtrace(fh), comp, dedup=dedup)
    write_learn_outputs(result, run / "learn")
    return result


def format_report(result: MiningResult) -> str:
    s = result.summary()
    lines = [
        f"learned: {s['learned']}",
        f"pruned: inviolable: {s['pruned_inviolable']}",
        f"dropped by per-block cap: {s['dropped_by_cap']}",
        f"kept: {s['kept']}",
        f"emission sites: {s['emission_sites']}",
        f"reusing sites: {s['reusing_sites']}",
        "",
        "pruned: inviolable",
    ]
    lines += [f"  [{v.id}] {v.ppt}: {v}" for v in result.inviolable]
    lines += ["", "dropped by cap"]
    lines += [f"  [{v.id}] {v.ppt}: {v}" for v in result.capped]
    lines += ["", "checks"]
    for inv in result.report.emitted():
        users = result.report.users(inv.id)
        others = [u for u in users if u != inv.ppt]
        tail = f"  (reused by {', '.join(others)})" if others else ""
        lines.append(f"  [{inv.id}] {inv.ppt}: {inv}{tail}")
    return "\n".join(lines) + "\n"


def write_learn_outputs(result: MiningResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "invariants.json").write_text(result.report.dumps() + "\n")
    (out / "report.txt").write_text(format_report(result))
    (out / "summary.json").write_text(json.dumps(result.summary(), indent=1) + "\n")


def load_invariants(path: Path) -> InvariantSetReport:
    path = Path(path)
    if not path.exists():
        raise PipelineError(f"missing invariants file {path}; run the learn stage first")
    return InvariantSetReport.loads(path.read_text())


# --- fuzz -------------------------------------------------------------------


def write_campaign(result: CampaignResult, out: Path) -> dict:
    corpus_dir = out / "corpus"
    crash_dir = out / "crashes"
    for d in (corpus_dir, crash_dir):
        d.mkdir(parents=True, exist_ok=True)
        for old in d.iterdir():
            old.unlink()
    for e in result.corpus:
        (corpus_dir / e.filename).write_bytes(e.data)
    crashes = []
    for c in result.crashes:
        (crash_dir / c.name).write_bytes(c.data)
        crashes.append(
            {
                "hash": c.name,
                "kind": c.kind,
                "stack": [f for f, _ in c.frames],
                "execution": c.execution,
            }
        )
    with open(out / "stats.jsonl", "w") as fh:
        for rec in result.stats.series:
            fh.write(json.dumps(rec) + "\n")
    timing = {
        "elapsed_sec": round(result.elapsed, 3),
        "execs_per_sec": round(result.execs_per_sec, 1),
        "window_execs_per_sec": [round(r, 1) for r in result.rates],
    }
    (out / "timing.json").write_text(json.dumps(timing, indent=1) + "\n")
    summary = {"totals": result.stats.totals(), "crashes": crashes}
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    return summary


def fuzz(
    program: Program,
    seeds: Sequence[bytes],
    out: Path,
    mode: str,
    budget: int,
    rng_seed: int,
    invariants: Optional[InvariantSetReport] = None,
) -> CampaignResult:
    if mode == "invscov" and invariants is None:
        raise PipelineError("invscov mode needs an invariants file")
    report = invariants if mode == "invscov" else None
    result = fuzz_loop(program, seeds, report, budget, rng_seed)
    write_campaign(result, Path(out) / f"fuzz-{mode}")
    return result

