"""Edge coverage augmented with invariant-check outcomes."""

from .coverage import (
    BUCKET_BOUNDS,
    CoverageMap,
    FeedbackState,
    Novelty,
    apply_check,
    bucket,
    check_outcome,
    is_interesting,
    log_edge,
)
from .hooks import CoverageHooks, run_with_feedback
from .target import CompiledTarget, TargetResult, generate_source

__all__ = [
    "BUCKET_BOUNDS",
    "CompiledTarget",
    "CoverageHooks",
    "CoverageMap",
    "FeedbackState",
    "Novelty",
    "TargetResult",
    "apply_check",
    "bucket",
    "check_outcome",
    "generate_source",
    "is_interesting",
    "log_edge",
    "run_with_feedback",
]
