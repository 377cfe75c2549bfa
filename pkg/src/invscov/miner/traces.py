"""Recording block-state traces of a corpus."""

from __future__ import annotations

import logging
from typing import Iterable, Iterator, Optional

from ..analysis.dumpvars import select_dump_variables
from ..interp.interpreter import DEFAULT_BUDGET, BlockState, Hooks, execute
from ..ir.model import Program
from .model import BlockStateRecord

log = logging.getLogger(__name__)


class _Recorder(Hooks):
    def __init__(self, dump: dict):
        self.dump = dump
        self.states: list[tuple[str, str, tuple]] = []

    def block_exit(self, state: BlockState) -> None:
        wanted = self.dump[state.function][state.block]
        if len(wanted) == len(state.values):
            obs = state.values
        else:
            values = dict(state.values)
            obs = tuple((n, values[n]) for n in wanted)
        self.states.append((state.function, state.label, obs))


def program_dump(program: Program) -> dict:
    return {f.name: select_dump_variables(f) for f in program.functions}


def record_traces(
    program: Program,
    corpus: Iterable[bytes],
    dump: Optional[dict] = None,
    budget: int = DEFAULT_BUDGET,
) -> Iterator[BlockStateRecord]:
    """Yield one record per executed block, input by input.

    Inputs that fault or run out of budget contribute nothing.
    """
    dump = dump if dump is not None else program_dump(program)
    nonce = 0
    for index, data in enumerate(corpus):
        rec = _Recorder(dump)
        result = execute(program, data, rec, budget=budget)
        if result.outcome != "ok":
            log.warning("corpus input %d skipped: %s", index, result.outcome)
            continue
        for fn, label, obs in rec.states:
            yield BlockStateRecord(fn, label, nonce, obs)
            nonce += 1
