"""Crash triage by hashing the call stack."""

from __future__ import annotations

import hashlib
from typing import Iterable

# Functions whose name starts with one of these are runtime/intrinsic
# helpers; their frames are dropped before hashing.
RUNTIME_PREFIXES = ("rt_",)


def _name(frame) -> str:
    return frame if isinstance(frame, str) else frame[0]


def strip_runtime(frames: Iterable, prefixes=RUNTIME_PREFIXES) -> list[str]:
    return [n for n in map(_name, frames) if not n.startswith(tuple(prefixes))]


def callstack_hash(frames, prefixes=RUNTIME_PREFIXES) -> int:
    """64-bit hash of the ordered function names in ``frames``.

    Frames may be plain names or ``(function, block)`` pairs; block ids do
    not take part in the hash.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("empty call stack")
    names = strip_runtime(frames, prefixes)
    digest = hashlib.blake2b("\x00".join(names).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def format_hash(h: int) -> str:
    return f"{h:016x}"
