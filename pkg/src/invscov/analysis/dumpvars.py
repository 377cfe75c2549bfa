"""Selection of the block values traced by the dumper."""

from __future__ import annotations

from ..ir.model import Function, block_state_names

DumpSet = dict  # block id -> ordered list of value names


def is_source_named(name: str) -> bool:
    # Numeric names (%0, %17) are anonymous temporaries.
    return not name.isdigit()


def selected_values(f: Function) -> set[str]:
    """Values of ``f`` that satisfy at least one selection rule."""
    constants = {i.result for i in f.instructions() if i.opcode == "const"}
    chosen = {n for n, _ in f.params if is_source_named(n)}
    for ins in f.instructions():
        if ins.result is not None and is_source_named(ins.result):
            chosen.add(ins.result)
        if ins.opcode == "gep":
            chosen.update(
                op for op in ins.operands[1:] if isinstance(op, str) and op not in constants
            )
        elif ins.opcode in ("load", "store"):
            chosen.update(ins.value_operands())
            if ins.result is not None:
                chosen.add(ins.result)
        elif ins.opcode == "ret":
            chosen.update(ins.value_operands())
    return chosen


def select_dump_variables(f: Function) -> DumpSet:
    chosen = selected_values(f)
    return {b.id: [n for n in block_state_names(b) if n in chosen] for b in f.blocks}
