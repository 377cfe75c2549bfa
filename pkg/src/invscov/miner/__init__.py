"""Learning likely invariants from block-state traces."""

from .daikon import (
    comparability_from_decls,
    parse_decls,
    parse_dtrace,
    write_decls,
    write_dtrace,
)
from .dedup import CheckSite, InvariantSetReport, deduplicate, deduplicate_program, no_dedup
from .learn import cap_invariants, learn_invariants, pair_eligible
from .model import BlockStateRecord, Invariant, holds
from .pipeline import MiningResult, mine, mine_records
from .prune import implied, prune_inviolable
from .traces import program_dump, record_traces

__all__ = [
    "BlockStateRecord",
    "CheckSite",
    "Invariant",
    "InvariantSetReport",
    "MiningResult",
    "cap_invariants",
    "comparability_from_decls",
    "deduplicate",
    "deduplicate_program",
    "holds",
    "implied",
    "learn_invariants",
    "mine",
    "mine_records",
    "no_dedup",
    "pair_eligible",
    "parse_decls",
    "parse_dtrace",
    "program_dump",
    "prune_inviolable",
    "record_traces",
    "write_decls",
    "write_dtrace",
]
