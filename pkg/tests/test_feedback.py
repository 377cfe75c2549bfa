import random

import pytest
from conftest import program
from progen import random_input, random_program

from invscov.feedback import (
    CompiledTarget,
    CoverageMap,
    FeedbackState,
    apply_check,
    bucket,
    is_interesting,
    log_edge,
    run_with_feedback,
)
from invscov.ir.parser import parse_program
from invscov.miner import Invariant, deduplicate_program, no_dedup
from invscov.targets import suite


def test_log_edge_examples():
    fs, m = FeedbackState(), CoverageMap()
    log_edge(fs, m, 6)
    assert m.hits() == {6: 1} and fs.prev_loc == 3
    log_edge(fs, m, 6)  # self loop: 6 ^ 3
    assert m.hits() == {6: 1, 5: 1} and fs.prev_loc == 3


def test_apply_check_outcomes():
    inv = Invariant(123, "f", "b", "lower-bound", ("v0",), (2,))  # v0 > 1
    fs = FeedbackState()
    assert apply_check(fs, inv, [0]) == 246
    assert apply_check(fs, inv, [5]) == 0
    with pytest.raises(ValueError):
        apply_check(fs, inv, [1, 2])


@pytest.mark.parametrize(
    "hits,expect", [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4), (5, 4), (7, 4), (8, 5), (15, 5),
                    (16, 6), (31, 6), (32, 7), (127, 7), (128, 8), (255, 8)]
)
def test_buckets(hits, expect):
    assert bucket(hits) == expect


def test_counters_saturate():
    m = CoverageMap()
    for _ in range(300):
        m.bump(7)
    assert m.counts[7] == 255
    assert CoverageMap.from_hits({1: 1000}).counts[1] == 255


def test_is_interesting_first_and_repeat():
    fs = FeedbackState()
    hits = {10: 1, 20: 3}
    assert is_interesting(fs, hits)[0]
    assert not is_interesting(fs, dict(hits))[0]
    new, nov = is_interesting(fs, {10: 5, 20: 3})
    assert new and nov.new_buckets == 1 and nov.new_indices == 0
    assert is_interesting(fs, CoverageMap.from_hits({30: 1}))[1].new_indices == 1


TWO_BYTES = """
func @main() -> i32 {
entry:
  %z = const u32 0
  %o = const u32 1
  %x = input_read u8 %z
  %y = input_read u8 %o
  jmp next
next:
  ret i32 0
}
"""


def _subspace_setup():
    p = program(TWO_BYTES)
    invs = [
        Invariant(5, "main", "entry", "upper-bound", ("x",), (99,)),
        Invariant(9, "main", "entry", "le-vars", ("x", "y")),
    ]
    return p, no_dedup(invs)


def test_two_invariants_split_one_edge_into_four_signals():
    p, rep = _subspace_setup()
    f = p.function("main")
    entry, nxt = f.blocks[0].loc, f.blocks[1].loc
    inputs = {(True, True): b"\x32\x3c", (False, True): b"\x96\xc8",
              (True, False): b"\x32\x0a", (False, False): b"\x96\x01"}
    indices = {}
    for pattern, data in inputs.items():
        _, hooks = run_with_feedback(p, data, rep)
        expected_prev = (entry >> 1) ^ (0 if pattern[0] else 10) ^ (0 if pattern[1] else 18)
        assert set(hooks.map.hits()) == {entry, nxt ^ expected_prev}
        indices[pattern] = nxt ^ expected_prev
    assert len(set(indices.values())) == 4


def test_violation_is_new_coverage_on_same_edges():
    p, rep = _subspace_setup()
    fs = FeedbackState()
    t = CompiledTarget(p, rep)
    assert is_interesting(fs, t.run(b"\x32\x3c").hits)[0]
    assert not is_interesting(fs, t.run(b"\x10\x20").hits)[0]
    assert is_interesting(fs, t.run(b"\x96\xc8").hits)[0]
    plain = CompiledTarget(p)
    assert plain.run(b"\x32\x3c").hits.keys() == plain.run(b"\x96\xc8").hits.keys()


def test_violation_perturbs_only_outgoing_edges():
    p, rep = _subspace_setup()
    plain = CompiledTarget(p).run(b"\x96\x01").hits
    inv = CompiledTarget(p, rep).run(b"\x96\x01").hits
    nxt = p.function("main").blocks[1].loc
    entry = p.function("main").blocks[0].loc
    assert {i for i in plain if plain[i] != inv.get(i)} == {nxt ^ (entry >> 1)}
    assert set(inv) - set(plain) == {nxt ^ (entry >> 1) ^ 10 ^ 18}


def test_reused_outcome_matches_local_check():
    text = TWO_BYTES.replace("jmp next\nnext:", "jmp mid\nmid:\n  %w = add u8 %x, 0\n  jmp next\nnext:")
    p = program(text)
    invs = [
        Invariant(1, "main", "entry", "upper-bound", ("x",), (99,)),
        Invariant(2, "main", "mid", "upper-bound", ("x",), (99,)),
    ]
    dedup = deduplicate_program(invs, p)
    assert len(dedup.emitted()) == 1
    for data in (b"\x10\x00", b"\xf0\x00"):
        a = CompiledTarget(p, dedup, observe=True).run(data)
        local = CompiledTarget(p, dedup.localized(), observe=True).run(data)
        assert a.hits == local.hits and a.outcomes == local.outcomes
        b = CompiledTarget(p, no_dedup(invs), observe=True).run(data)
        assert sorted((s, o != 0) for s, _, o in a.outcomes) == sorted((s, o != 0) for s, _, o in b.outcomes)


def _same(program, report, data):
    res, hooks = run_with_feedback(program, data, report, budget=200_000)
    comp = CompiledTarget(program, report, observe=True).run(data, budget=200_000)
    assert comp.outcome == res.outcome
    assert comp.exit_value == res.exit_value
    assert comp.fault == res.fault
    if res.outcome != "budget-exhausted":
        assert comp.steps == res.steps
        assert CoverageMap.from_hits(comp.hits) == hooks.map
        assert comp.outcomes == hooks.outcomes


@pytest.mark.parametrize("target", suite(), ids=lambda t: t.name)
def test_compiled_target_matches_reference_on_suite(target):
    from invscov.miner import mine

    p = target.program
    report = mine(p, target.seeds, min_samples=1).report
    rng = random.Random(target.name)
    inputs = list(target.seeds)
    for _ in range(40):
        base = bytearray(rng.choice(target.seeds))
        for _ in range(rng.randint(0, 4)):
            if base:
                base[rng.randrange(len(base))] = rng.randrange(256)
        inputs.append(bytes(base))
    inputs.append(b"")
    for data in inputs:
        _same(p, None, data)
        _same(p, report, data)


@pytest.mark.parametrize("seed", range(30))
def test_compiled_target_matches_reference_on_random_programs(seed):
    from invscov.miner import mine

    p = parse_program(random_program(seed))
    rng = random.Random(seed)
    corpus = [random_input(rng) for _ in range(8)]
    report = mine(p, corpus, min_samples=2).report
    for data in corpus + [random_input(rng) for _ in range(8)] + [b"\x00"]:
        _same(p, report, data)


def test_step_budget_in_compiled_target():
    p = program("func @main() -> i32 {\nentry:\n  jmp spin\nspin:\n  jmp spin\n}\n")
    assert CompiledTarget(p).run(b"", budget=100).outcome == "budget-exhausted"
