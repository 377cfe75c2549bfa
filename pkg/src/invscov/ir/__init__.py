"""Textual SSA IR: data model, parser/validator, CFG and dominators."""

from .cfg import CFG, DominatorTree, UnreachableBlock, build_cfg, dominator_tree, function_domtree
from .model import (
    MAP_SIZE,
    BasicBlock,
    Function,
    Global,
    Instruction,
    Program,
    block_state_names,
    ppt_name,
)
from .parser import Diagnostic, ParseError, ValidationError, load_program, parse_program
from .types import TYPES, ScalarType

__all__ = [
    "CFG",
    "MAP_SIZE",
    "TYPES",
    "BasicBlock",
    "Diagnostic",
    "DominatorTree",
    "Function",
    "Global",
    "Instruction",
    "ParseError",
    "Program",
    "ScalarType",
    "UnreachableBlock",
    "ValidationError",
    "block_state_names",
    "build_cfg",
    "dominator_tree",
    "function_domtree",
    "load_program",
    "parse_program",
    "ppt_name",
]
