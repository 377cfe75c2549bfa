"""Control flow graphs and dominator trees."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import Function


class UnreachableBlock(Exception):
    def __init__(self, block_id: int):
        super().__init__(f"block {block_id} is not reachable from the root")
        self.block_id = block_id


@dataclass
class CFG:
    nodes: list[int]
    succ: dict[int, list[int]]
    pred: dict[int, list[int]]
    root: int = 0

    @classmethod
    def from_edges(cls, nodes, edges, root: int = 0) -> "CFG":
        succ = {n: [] for n in nodes}
        pred = {n: [] for n in nodes}
        for a, b in edges:
            if b not in succ[a]:
                succ[a].append(b)
                pred[b].append(a)
        return cls(list(nodes), succ, pred, root)

    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in self.nodes for b in self.succ[a]]

    def reachable(self) -> set[int]:
        seen = {self.root}
        stack = [self.root]
        while stack:
            n = stack.pop()
            for s in self.succ[n]:
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        return seen

    def restrict(self, keep) -> "CFG":
        keep = set(keep)
        nodes = [n for n in self.nodes if n in keep]
        return CFG.from_edges(
            nodes, [(a, b) for a, b in self.edges() if a in keep and b in keep], self.root
        )

    def reverse_postorder(self) -> list[int]:
        order: list[int] = []
        seen = {self.root}
        # iterative DFS keeping an explicit successor cursor per node
        stack = [(self.root, iter(self.succ[self.root]))]
        while stack:
            node, it = stack[-1]
            for s in it:
                if s not in seen:
                    seen.add(s)
                    stack.append((s, iter(self.succ[s])))
                    break
            else:
                stack.pop()
                order.append(node)
        order.reverse()
        return order


def build_cfg(f: Function) -> CFG:
    ids = f.label_to_id()
    edges = []
    for b in f.blocks:
        for label in b.successors():
            edges.append((b.id, ids[label]))
    return CFG.from_edges([b.id for b in f.blocks], edges, root=f.blocks[0].id)


@dataclass
class DominatorTree:
    idom: dict[int, Optional[int]]
    root: int
    children: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        self.children = {n: [] for n in self.idom}
        for n, d in self.idom.items():
            if d is not None:
                self.children[d].append(n)

    def ancestors(self, node: int) -> list[int]:
        """Strict dominators of ``node``, nearest first."""
        out = []
        d = self.idom[node]
        while d is not None:
            out.append(d)
            d = self.idom[d]
        return out

    def dominates(self, a: int, b: int) -> bool:
        return a == b or a in self.ancestors(b)

    def strictly_dominates(self, a: int, b: int) -> bool:
        return a != b and self.dominates(a, b)

    def dominators(self, node: int) -> set[int]:
        return {node, *self.ancestors(node)}


def dominator_tree(cfg: CFG) -> DominatorTree:
    """Iterative dominator computation over reverse postorder.

    Follows Cooper, Harvey and Kennedy's "A Simple, Fast Dominance
    Algorithm": intersect the current idoms of processed predecessors by
    walking up with postorder numbers until the two fingers meet.
    """
    rpo = cfg.reverse_postorder()
    if len(rpo) != len(cfg.nodes):
        missing = [n for n in cfg.nodes if n not in set(rpo)]
        raise UnreachableBlock(missing[0])
    po_num = {n: len(rpo) - 1 - i for i, n in enumerate(rpo)}
    idom: dict[int, Optional[int]] = {cfg.root: cfg.root}

    def intersect(a: int, b: int) -> int:
        while a != b:
            while po_num[a] < po_num[b]:
                a = idom[a]
            while po_num[b] < po_num[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in rpo[1:]:
            new = None
            for p in cfg.pred[n]:
                if p in idom:
                    new = p if new is None else intersect(p, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    idom[cfg.root] = None
    return DominatorTree({n: idom[n] for n in cfg.nodes}, cfg.root)


def function_domtree(f: Function) -> DominatorTree:
    """Dominator tree of the live part of ``f`` (dead blocks dropped)."""
    cfg = build_cfg(f)
    return dominator_tree(cfg.restrict(cfg.reachable()))
