"""Fixed-width integer scalar types."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ScalarType:
    name: str
    bits: int
    signed: bool

    @property
    def lo(self) -> int:
        return -(1 << (self.bits - 1)) if self.signed else 0

    @property
    def hi(self) -> int:
        return (1 << (self.bits - 1)) - 1 if self.signed else (1 << self.bits) - 1

    @property
    def mask(self) -> int:
        return (1 << self.bits) - 1

    @property
    def size(self) -> int:
        return self.bits // 8

    def wrap(self, value: int) -> int:
        """Reduce ``value`` modulo 2**bits into this type's range."""
        value &= self.mask
        if self.signed and value > self.hi:
            value -= 1 << self.bits
        return value

    def contains(self, value: int) -> bool:
        return self.lo <= value <= self.hi

    def c_name(self) -> str:
        return f"{'' if self.signed else 'u'}int{self.bits}_t"

    def __str__(self) -> str:
        return self.name


TYPES: dict[str, ScalarType] = {}
for _bits in (8, 16, 32, 64):
    TYPES[f"i{_bits}"] = ScalarType(f"i{_bits}", _bits, True)
    TYPES[f"u{_bits}"] = ScalarType(f"u{_bits}", _bits, False)

U8 = TYPES["u8"]
U64 = TYPES["u64"]
# icmp results are 0/1 stored as u8; addresses are u64.
BOOL = U8
ADDR = U64
