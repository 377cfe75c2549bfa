"""Sharing checks between a block and the blocks it dominates."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from ..ir.cfg import DominatorTree, function_domtree
from ..ir.model import Program
from .model import Invariant


@dataclass(frozen=True)
class CheckSite:
    """An invariant required at ``ppt`` and evaluated at ``invariant.ppt``."""

    ppt: str
    invariant: Invariant

    @property
    def emission_site(self) -> str:
        return self.invariant.ppt

    @property
    def emitted_here(self) -> bool:
        return self.ppt == self.invariant.ppt

    def to_json(self) -> dict:
        inv = self.invariant
        return {
            "id": inv.id,
            "ppt": self.ppt,
            "kind": inv.kind,
            "vars": list(inv.vars),
            "params": list(inv.params),
            "emission_site": self.emission_site,
        }


@dataclass
class InvariantSetReport:
    sites: list[CheckSite]

    def emitted(self) -> list[Invariant]:
        seen = {}
        for s in self.sites:
            seen.setdefault(s.invariant.id, s.invariant)
        return list(seen.values())

    def by_ppt(self) -> dict[str, list[CheckSite]]:
        out: dict[str, list[CheckSite]] = {}
        for s in self.sites:
            out.setdefault(s.ppt, []).append(s)
        return out

    def users(self, inv_id: int) -> list[str]:
        return [s.ppt for s in self.sites if s.invariant.id == inv_id]

    def localized(self) -> "InvariantSetReport":
        """Same checks and ids, but every site evaluates its own copy.

        The coverage map of this form must equal the deduplicated one.
        """
        sites = []
        for s in self.sites:
            fn, _, block = s.ppt.partition(".")
            sites.append(CheckSite(s.ppt, replace(s.invariant, function=fn, block=block)))
        return InvariantSetReport(sites)

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.sites]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, items: Sequence[dict]) -> "InvariantSetReport":
        emitted: dict[int, Invariant] = {}
        for it in items:
            if it["ppt"] == it["emission_site"]:
                fn, _, block = it["ppt"].partition(".")
                emitted[it["id"]] = Invariant(
                    it["id"], fn, block, it["kind"], tuple(it["vars"]), tuple(it["params"])
                )
        sites = []
        for it in items:
            inv = emitted.get(it["id"])
            if inv is None or inv.ppt != it["emission_site"]:
                raise ValueError(f"invariant {it['id']} has no emission entry")
            sites.append(CheckSite(it["ppt"], inv))
        return cls(sites)

    @classmethod
    def loads(cls, text: str) -> "InvariantSetReport":
        return cls.from_json(json.loads(text))


def deduplicate(
    invs: Sequence[Invariant],
    domtrees: Mapping[str, DominatorTree],
    labels: Mapping[str, Mapping[str, int]],
) -> InvariantSetReport:
    """Point each invariant at its topmost dominating copy.

    ``labels`` maps each function to its label -> block id table.
    """
    index: dict[tuple, Invariant] = {}
    for inv in invs:
        index.setdefault((inv.key, inv.block), inv)
    sites = []
    for inv in invs:
        tree = domtrees[inv.function]
        ids = labels[inv.function]
        names = {i: l for l, i in ids.items()}
        site = inv
        for d in tree.ancestors(ids[inv.block]):
            other = index.get((inv.key, names[d]))
            if other is not None:
                site = other  # keep walking: the outermost copy wins
        sites.append(CheckSite(inv.ppt, site))
    return InvariantSetReport(sites)


def deduplicate_program(invs: Sequence[Invariant], program: Program) -> InvariantSetReport:
    domtrees = {f.name: function_domtree(f) for f in program.functions}
    labels = {f.name: f.label_to_id() for f in program.functions}
    return deduplicate(invs, domtrees, labels)


def no_dedup(invs: Sequence[Invariant]) -> InvariantSetReport:
    """Every invariant checked where it was learned."""
    return InvariantSetReport([CheckSite(inv.ppt, inv) for inv in invs])
