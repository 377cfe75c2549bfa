"""Invariant-coverage fuzzing toolkit.

Learns likely invariants per basic block of a small SSA IR from execution
traces, prunes them with static analyses and fuzzes the program with an
edge-coverage map whose indices are perturbed by invariant violations.
"""

__version__ = "0.1.0"
