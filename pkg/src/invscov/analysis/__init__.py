"""Static analyses that shape and prune invariant learning."""

from .comparability import (
    EPSILON,
    ComparabilityMap,
    compute_comparability,
    merge_comparability,
)
from .describe import ProgramAnalysis
from .dumpvars import DumpSet, select_dump_variables
from .ranges import Interval, RangeMap, compute_program_ranges, compute_ranges

__all__ = [
    "EPSILON",
    "ComparabilityMap",
    "DumpSet",
    "Interval",
    "ProgramAnalysis",
    "RangeMap",
    "compute_comparability",
    "compute_program_ranges",
    "compute_ranges",
    "merge_comparability",
    "select_dump_variables",
]
