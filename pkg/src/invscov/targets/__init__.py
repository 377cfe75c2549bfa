"""Benchmark targets shipped with the package.

Each ``.ir`` file describes itself in leading comment directives::

    ; planted: <fault kind> <fn>[>fn...]   call stack of a planted fault
    ; state-bug: yes                       fault hides behind unusual values
    ; seed: <hex> [<hex> ...]              one seed input per hex string
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from ..interp.callstack import callstack_hash
from ..ir.model import Program
from ..ir.parser import load_program

TARGET_DIR = Path(__file__).parent
_DIRECTIVE = re.compile(r"^;\s*(planted|state-bug|seed):\s*(.*)$")


@dataclass(frozen=True)
class PlantedFault:
    kind: str
    stack: tuple  # function names, outermost first

    @property
    def hash(self) -> int:
        return callstack_hash(self.stack)


@dataclass
class Target:
    name: str
    path: Path
    seeds: list
    planted: list
    state_bug: bool = False

    @cached_property
    def program(self) -> Program:
        return load_program(self.path)

    def planted_hashes(self) -> set[int]:
        return {p.hash for p in self.planted}


def parse_directives(text: str, name: str = "", path: Path = Path()) -> Target:
    seeds, planted, state_bug = [], [], False
    for line in text.splitlines():
        m = _DIRECTIVE.match(line.strip())
        if not m:
            continue
        key, value = m.group(1), m.group(2).strip()
        if key == "seed":
            seeds.extend(bytes.fromhex(tok) for tok in value.split())
        elif key == "planted":
            kind, stack = value.split()
            planted.append(PlantedFault(kind, tuple(stack.split(">"))))
        else:
            state_bug = value.lower() in ("yes", "true", "1")
    return Target(name, path, seeds or [b""], planted, state_bug)


def load_target(path) -> Target:
    path = Path(path)
    return parse_directives(path.read_text(), path.stem, path)


def suite() -> list[Target]:
    return [load_target(p) for p in sorted(TARGET_DIR.glob("*.ir"))]


def get(name: str) -> Target:
    path = TARGET_DIR / f"{name}.ir"
    if not path.exists():
        raise KeyError(f"no benchmark target named {name!r}")
    return load_target(path)
