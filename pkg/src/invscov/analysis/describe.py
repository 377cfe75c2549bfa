"""JSON description of program points and traced variables."""

from __future__ import annotations

from ..ir.model import Program, ppt_name
from .comparability import ComparabilityMap, compute_comparability
from .dumpvars import DumpSet, select_dump_variables
from .ranges import RangeMap, compute_program_ranges


class ProgramAnalysis:
    """Comparability, dump sets and ranges for every function of a program."""

    def __init__(self, program: Program):
        self.program = program
        self.comparability: dict[str, ComparabilityMap] = {}
        self.dump: dict[str, DumpSet] = {}
        for f in program.functions:
            self.comparability[f.name] = compute_comparability(f)
            self.dump[f.name] = select_dump_variables(f)
        self.ranges: dict[str, RangeMap] = compute_program_ranges(program)

    def describe(self) -> dict:
        funcs = []
        for f in self.program.functions:
            comp = self.comparability[f.name]
            ranges = self.ranges[f.name]
            blocks = []
            for b in f.blocks:
                blocks.append(
                    {
                        "id": b.id,
                        "label": b.label,
                        "ppt": ppt_name(f.name, b.label),
                        "loc": b.loc,
                        "variables": [
                            {
                                "name": n,
                                "type": str(f.value_types[n]),
                                "comparability": comp.daikon_id(n),
                                "bounds": ranges.at(b.id, n).to_json(),
                            }
                            for n in self.dump[f.name][b.id]
                        ],
                    }
                )
            funcs.append({"name": f.name, "blocks": blocks})
        return {
            "entry": self.program.entry,
            "seed": self.program.seed,
            "functions": funcs,
        }
