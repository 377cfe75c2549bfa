"""Integer semantics shared by the interpreter and the compiled targets.

Arithmetic wraps modulo 2**width; the only faulting operation here is a
division (or remainder) by zero.
"""

from __future__ import annotations

from ..ir.types import ScalarType


class DivisionByZero(ArithmeticError):
    pass


def trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def trunc_rem(a: int, b: int) -> int:
    return a - trunc_div(a, b) * b


def binop(op: str, ty: ScalarType, a: int, b: int) -> int:
    if op == "add":
        r = a + b
    elif op == "sub":
        r = a - b
    elif op == "mul":
        r = a * b
    elif op == "div":
        if b == 0:
            raise DivisionByZero
        r = trunc_div(a, b)
    elif op == "rem":
        if b == 0:
            raise DivisionByZero
        r = trunc_rem(a, b)
    elif op == "and":
        r = a & b
    elif op == "or":
        r = a | b
    elif op == "xor":
        r = a ^ b
    elif op == "shl":
        r = a << (b & (ty.bits - 1))
    elif op == "shr":
        r = a >> (b & (ty.bits - 1))
    else:
        raise ValueError(op)
    return ty.wrap(r)


def unop(op: str, ty: ScalarType, a: int) -> int:
    if op == "neg":
        return ty.wrap(-a)
    if op == "not":
        return ty.wrap(~a)
    raise ValueError(op)


def icmp(pred: str, a: int, b: int) -> int:
    if pred == "lt":
        return int(a < b)
    if pred == "le":
        return int(a <= b)
    if pred == "eq":
        return int(a == b)
    if pred == "ne":
        return int(a != b)
    raise ValueError(pred)


def gep_offset(size: int, indices: list[int], strides: tuple) -> int:
    total = 0
    for idx, stride in zip(indices, (*strides, 1)):
        total += idx * stride
    return total * size
