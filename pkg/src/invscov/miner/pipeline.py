"""Learn, prune, cap and deduplicate in one call."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from ..analysis.comparability import ComparabilityMap, compute_comparability
from ..analysis.ranges import compute_program_ranges
from ..ir.model import Program, ppt_name
from .dedup import InvariantSetReport, deduplicate_program, no_dedup
from .learn import CAP_PER_BLOCK, MIN_SAMPLES, cap_invariants, learn_invariants
from .model import BlockStateRecord, Invariant
from .prune import prune_inviolable
from .traces import record_traces


@dataclass
class MiningResult:
    learned: list[Invariant]
    inviolable: list[Invariant]
    capped: list[Invariant]
    kept: list[Invariant]
    report: InvariantSetReport

    def summary(self) -> dict:
        emitted = self.report.emitted()
        return {
            "learned": len(self.learned),
            "pruned_inviolable": len(self.inviolable),
            "dropped_by_cap": len(self.capped),
            "kept": len(self.kept),
            "emission_sites": len(emitted),
            "reusing_sites": len(self.report.sites) - len(emitted),
        }


def program_order(program: Program) -> list[str]:
    return [ppt_name(f.name, b.label) for f in program.functions for b in f.blocks]


def mine_records(
    program: Program,
    records: Iterable[BlockStateRecord],
    comp: Optional[Mapping[str, ComparabilityMap]] = None,
    dedup: bool = True,
    min_samples: int = MIN_SAMPLES,
    cap: int = CAP_PER_BLOCK,
) -> MiningResult:
    if comp is None:
        comp = {f.name: compute_comparability(f) for f in program.functions}
    learned = learn_invariants(records, comp, min_samples, order=program_order(program))
    survivors = prune_inviolable(learned, compute_program_ranges(program))
    kept = cap_invariants(survivors, cap)
    alive = {v.id for v in survivors}
    inviolable = [v for v in learned if v.id not in alive]
    kept_ids = {v.id for v in kept}
    capped = [v for v in survivors if v.id not in kept_ids]
    report = deduplicate_program(kept, program) if dedup else no_dedup(kept)
    return MiningResult(learned, inviolable, capped, kept, report)


def mine(program: Program, corpus: Iterable[bytes], **kw) -> MiningResult:
    """Trace ``corpus`` and mine invariants from it."""
    return mine_records(program, record_traces(program, corpus), **kw)
