"""Trace records and learned invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

UNARY_KINDS = ("const-equal", "one-of", "lower-bound", "upper-bound", "non-zero")
BINARY_KINDS = ("eq-vars", "le-vars", "linear")
KINDS = UNARY_KINDS + BINARY_KINDS

MAX_ID = (1 << 15) - 1


@dataclass(frozen=True)
class BlockStateRecord:
    function: str
    block: str  # block label
    nonce: int
    observations: tuple  # ((name, value), ...) in dump order

    @property
    def ppt(self) -> str:
        return f"{self.function}.{self.block}"

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.observations)

    @property
    def values(self) -> tuple:
        return tuple(v for _, v in self.observations)


def holds(kind: str, params: Sequence[int], values: Sequence[int]) -> bool:
    """Evaluate an invariant predicate on concrete values."""
    if kind == "const-equal":
        return values[0] == params[0]
    if kind == "one-of":
        return values[0] in params
    if kind == "lower-bound":
        return values[0] >= params[0]
    if kind == "upper-bound":
        return values[0] <= params[0]
    if kind == "non-zero":
        return values[0] != 0
    if kind == "eq-vars":
        return values[0] == values[1]
    if kind == "le-vars":
        return values[0] <= values[1]
    if kind == "linear":
        a, b = params
        return values[1] == a * values[0] + b
    raise ValueError(f"unknown invariant kind {kind!r}")


def render(kind: str, vars: Sequence[str], params: Sequence[int]) -> str:
    x = vars[0]
    if kind == "const-equal":
        return f"{x} == {params[0]}"
    if kind == "one-of":
        return f"{x} one of {{{', '.join(map(str, params))}}}"
    if kind == "lower-bound":
        return f"{x} >= {params[0]}"
    if kind == "upper-bound":
        return f"{x} <= {params[0]}"
    if kind == "non-zero":
        return f"{x} != 0"
    y = vars[1]
    if kind == "eq-vars":
        return f"{x} == {y}"
    if kind == "le-vars":
        return f"{x} <= {y}"
    a, b = params
    return f"{y} == {a} * {x} + {b}"


@dataclass(frozen=True)
class Invariant:
    id: int
    function: str
    block: str  # block label
    kind: str
    vars: tuple
    params: tuple = ()
    samples: int = field(default=0, compare=False)

    def __post_init__(self):
        if not 0 < self.id <= MAX_ID:
            raise ValueError(f"invariant id {self.id} outside 1..{MAX_ID}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown invariant kind {self.kind!r}")
        if len(self.vars) != self.arity:
            raise ValueError(f"{self.kind} relates {self.arity} variable(s)")

    @property
    def ppt(self) -> str:
        return f"{self.function}.{self.block}"

    @property
    def arity(self) -> int:
        return 2 if self.kind in BINARY_KINDS else 1

    @property
    def key(self) -> tuple:
        """Canonical form shared by identical invariants at different blocks."""
        return (self.function, self.kind, self.vars, self.params)

    @property
    def violation_code(self) -> int:
        return self.id << 1

    def holds(self, values: Sequence[int]) -> bool:
        return holds(self.kind, self.params, values)

    def __str__(self) -> str:
        return render(self.kind, self.vars, self.params)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "ppt": self.ppt,
            "kind": self.kind,
            "vars": list(self.vars),
            "params": list(self.params),
            "samples": self.samples,
        }
