"""Havoc-style stacked byte mutations."""

from __future__ import annotations

import random
from typing import Optional

INTERESTING_BYTES = (0x00, 0x01, 0x10, 0x20, 0x40, 0x64, 0x7F, 0x80, 0xFF)
MAX_DELTA = 35
MAX_INPUT = 1024
MAX_STACK_POWER = 6

OPS = (
    "bit-flip",
    "random-byte",
    "interesting-byte",
    "arith",
    "delete-chunk",
    "duplicate-chunk",
    "splice",
)


def _chunk_len(rng: random.Random, limit: int) -> int:
    # Small chunks are far more common, as in AFL's havoc.
    top = min(limit, rng.choice((4, 16, 64)))
    return rng.randint(1, max(top, 1))


def splice(a: bytes, b: bytes, rng: random.Random) -> Optional[bytes]:
    """A prefix of ``a`` joined to the matching suffix of ``b``."""
    n = min(len(a), len(b))
    if n < 2:
        return None
    k = rng.randint(1, n - 1)
    return a[:k] + b[k:]


def apply_op(
    op: str, buf: bytearray, rng: random.Random, other: Optional[bytes], max_len: int
) -> bool:
    """Apply ``op`` in place; False if it does not apply to ``buf``."""
    n = len(buf)
    if op == "bit-flip":
        if not n:
            return False
        buf[rng.randrange(n)] ^= 1 << rng.randrange(8)
    elif op == "random-byte":
        if not n:
            return False
        buf[rng.randrange(n)] = rng.randrange(256)
    elif op == "interesting-byte":
        if not n:
            return False
        buf[rng.randrange(n)] = rng.choice(INTERESTING_BYTES)
    elif op == "arith":
        if not n:
            return False
        i = rng.randrange(n)
        delta = rng.randint(1, MAX_DELTA)
        buf[i] = (buf[i] + (delta if rng.random() < 0.5 else -delta)) & 0xFF
    elif op == "delete-chunk":
        if n < 2:
            return False
        size = _chunk_len(rng, n - 1)
        start = rng.randrange(n - size + 1)
        del buf[start : start + size]
    elif op == "duplicate-chunk":
        if n >= max_len:
            return False
        if not n:
            buf.extend(rng.randrange(256) for _ in range(_chunk_len(rng, max_len)))
            return True
        size = _chunk_len(rng, min(n, max_len - n))
        start = rng.randrange(n - size + 1)
        chunk = buf[start : start + size]
        at = rng.randint(0, n)
        buf[at:at] = chunk
    elif op == "splice":
        if other is None:
            return False
        joined = splice(bytes(buf), other, rng)
        if joined is None or joined == bytes(buf):
            return False
        buf[:] = joined[:max_len]
    else:
        raise ValueError(op)
    return True


def mutate(
    data: bytes,
    rng: random.Random,
    other: Optional[bytes] = None,
    max_len: int = MAX_INPUT,
) -> bytes:
    """Apply 1..64 stacked operations; the result always differs from ``data``."""
    buf = bytearray(data)
    rounds = 1 << rng.randint(0, MAX_STACK_POWER)
    done = 0
    while done < rounds or bytes(buf) == data:
        if apply_op(rng.choice(OPS), buf, rng, other, max_len):
            done += 1
    return bytes(buf)
