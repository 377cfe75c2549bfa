"""Coverage-guided mutational fuzzing."""

from .campaign import (
    Campaign,
    CampaignResult,
    CampaignStats,
    Crash,
    CrashSet,
    fuzz_loop,
)
from .corpus import Corpus, CorpusEntry, calibrate, coverage_signature, greedy_cover, pick_testcase
from .mutate import OPS, mutate, splice

__all__ = [
    "Campaign",
    "CampaignResult",
    "CampaignStats",
    "Corpus",
    "CorpusEntry",
    "Crash",
    "CrashSet",
    "OPS",
    "calibrate",
    "coverage_signature",
    "fuzz_loop",
    "greedy_cover",
    "mutate",
    "pick_testcase",
    "splice",
]
