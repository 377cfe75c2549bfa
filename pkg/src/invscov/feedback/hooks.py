"""Coverage feedback on top of the reference interpreter.

Slow but simple; the compiled targets are tested against it.
"""

from __future__ import annotations

from typing import Optional

from ..interp.interpreter import DEFAULT_BUDGET, BlockState, ExecutionResult, Hooks, execute
from ..ir.model import Program, ppt_name
from .coverage import CoverageMap, FeedbackState, apply_check, log_edge


class CoverageHooks(Hooks):
    def __init__(self, program: Program, report=None, fs: Optional[FeedbackState] = None):
        self.fs = fs or FeedbackState()
        self.map = CoverageMap()
        self.sites = report.by_ppt() if report is not None else {}
        self.cache: dict[tuple[int, int], int] = {}
        self.outcomes: list[tuple[str, int, int]] = []  # (ppt, invariant id, outcome)
        self.loc = {
            (f.name, b.id): b.loc for f in program.functions for b in f.blocks
        }

    def block_enter(self, function, block, activation) -> None:
        log_edge(self.fs, self.map, block.loc)

    def block_exit(self, state: BlockState) -> None:
        ppt = ppt_name(state.function, state.label)
        sites = self.sites.get(ppt)
        if not sites:
            return
        values = state.as_dict()
        for site in sites:
            inv = site.invariant
            key = (state.activation, inv.id)
            if site.emitted_here:
                out = apply_check(self.fs, inv, [values[v] for v in inv.vars])
                self.cache[key] = out
            else:
                out = self.cache[key]
            self.fs.prev_loc ^= out
            self.outcomes.append((ppt, inv.id, out))


def run_with_feedback(
    program: Program, data: bytes, report=None, budget: int = DEFAULT_BUDGET
) -> tuple[ExecutionResult, CoverageHooks]:
    hooks = CoverageHooks(program, report)
    result = execute(program, data, hooks, budget=budget)
    return result, hooks
