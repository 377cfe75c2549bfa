"""Deterministic execution of IR programs."""

from .callstack import RUNTIME_PREFIXES, callstack_hash, format_hash, strip_runtime
from .interpreter import (
    DEFAULT_BUDGET,
    FAULT_KINDS,
    BlockState,
    ExecutionResult,
    Fault,
    HookChain,
    Hooks,
    InstructionEvent,
    execute,
)

__all__ = [
    "DEFAULT_BUDGET",
    "FAULT_KINDS",
    "RUNTIME_PREFIXES",
    "BlockState",
    "ExecutionResult",
    "Fault",
    "HookChain",
    "Hooks",
    "InstructionEvent",
    "callstack_hash",
    "execute",
    "format_hash",
    "strip_runtime",
]
