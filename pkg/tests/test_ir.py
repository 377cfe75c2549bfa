import itertools
import random

import pytest
from conftest import program

from invscov.ir.cfg import CFG, UnreachableBlock, build_cfg, dominator_tree, function_domtree
from invscov.ir.parser import ParseError, ValidationError, parse_program


def test_max_parses_into_four_blocks(max_program):
    f = max_program.function("max")
    assert [b.label for b in f.blocks] == ["entry", "then", "else", "end"]
    end = f.block("end")
    assert [i.opcode for i in end.phis] == ["phi"]
    assert end.phis[0].operands == ("m1", "m2")


def test_block_locations_are_seeded_and_distinct(max_program):
    locs = [b.loc for f in max_program.functions for b in f.blocks]
    assert len(set(locs)) == len(locs)
    assert all(0 <= loc < 1 << 16 for loc in locs)
    again = parse_program(max_program.source)
    assert locs == [b.loc for f in again.functions for b in f.blocks]
    other = parse_program(max_program.source.replace("seed=7", "seed=8"))
    assert locs != [b.loc for f in other.functions for b in f.blocks]


def test_globals_are_aligned_from_base():
    p = program(
        "global @a 3\nglobal @b 8 = 1 2\n"
        "func @main() -> i32 {\nentry:\n  ret i32 0\n}\n"
    )
    assert p.globals["a"].address == 0x100
    assert p.globals["b"].address == 0x108
    mem = p.initial_memory()
    assert mem[0x108:0x10A] == bytes([1, 2])


def test_double_assignment_rejected():
    with pytest.raises(ValidationError, match="assigned only once"):
        program("func @main() -> i32 {\nentry:\n  %x = const i32 1\n  %x = const i32 2\n  ret i32 %x\n}\n")


def test_empty_body_rejected():
    with pytest.raises(ValidationError, match="missing terminator"):
        program("func @main() -> i32 {\n}\n")


def test_block_without_terminator_rejected():
    with pytest.raises(ValidationError, match="missing terminator"):
        program("func @main() -> i32 {\nentry:\n  %x = const i32 1\n}\n")


def test_unknown_opcode_and_use_before_def_listed_together():
    text = (
        "func @main() -> i32 {\nentry:\n  %y = frob i32 1\n"
        "  %z = add i32 %w, 1\n  %w = const i32 2\n  ret i32 %z\n}\n"
    )
    with pytest.raises(ValidationError) as exc:
        program(text)
    msgs = [d.message for d in exc.value.diagnostics]
    assert any("unknown opcode" in m for m in msgs)
    assert any("not defined before" in m for m in msgs)
    assert [d.line for d in exc.value.diagnostics] == sorted(d.line for d in exc.value.diagnostics)


def test_phi_must_lead_its_block():
    text = (
        "func @main(i32 %a) -> i32 {\nentry:\n  %c = icmp.eq i32 %a, 0\n  br %c, l, r\n"
        "l:\n  jmp m\nr:\n  jmp m\nm:\n  %k = const i32 1\n"
        "  %p = phi i32 [%a, l], [%a, r]\n  ret i32 %p\n}\n"
    )
    with pytest.raises(ValidationError, match="head of its block"):
        program(text)


def test_phi_arms_must_match_predecessors():
    text = (
        "func @main(i32 %a) -> i32 {\nentry:\n  %c = icmp.eq i32 %a, 0\n  br %c, l, r\n"
        "l:\n  jmp m\nr:\n  jmp m\nm:\n  %p = phi i32 [%a, l]\n  ret i32 %p\n}\n"
    )
    with pytest.raises(ValidationError, match="predecessors"):
        program(text)


def test_instruction_after_terminator_rejected():
    with pytest.raises(ValidationError, match="after terminator"):
        program("func @main() -> i32 {\nentry:\n  ret i32 0\n  %x = const i32 1\n}\n")


def test_unknown_call_target_rejected():
    with pytest.raises(ValidationError):
        program("func @main() -> i32 {\nentry:\n  %x = call i32 @nope()\n  ret i32 %x\n}\n")


def test_missing_header_is_parse_error():
    with pytest.raises(ParseError) as exc:
        parse_program("func @main() -> i32 {\nentry:\n  ret i32 0\n}\n")
    assert exc.value.line == 1


def test_unclosed_function_is_parse_error():
    with pytest.raises(ParseError, match="not closed"):
        program("func @main() -> i32 {\nentry:\n  ret i32 0\n")


def test_dead_blocks_are_flagged_not_rejected():
    p = program("func @main() -> i32 {\nentry:\n  ret i32 0\ndead:\n  ret i32 1\n}\n")
    assert p.function("main").dead_blocks == {1}


def _diamond():
    return program(
        "func @main(i32 %a) -> i32 {\nentry:\n  %c = icmp.lt i32 %a, 0\n  br %c, then, else\n"
        "then:\n  jmp merge\nelse:\n  jmp merge\nmerge:\n  ret i32 %a\n}\n"
    ).function("main")


def test_cfg_diamond():
    cfg = build_cfg(_diamond())
    assert set(cfg.succ[0]) == {1, 2}
    assert set(cfg.pred[3]) == {1, 2}


def test_cfg_single_block_has_no_edges():
    f = program("func @main() -> i32 {\nentry:\n  ret i32 0\n}\n").function("main")
    assert build_cfg(f).edges() == []


def test_cfg_loop_back_edge():
    f = program(
        "func @main(u32 %n) -> i32 {\nentry:\n  jmp header\n"
        "header:\n  %i = phi u32 [0, entry], [%j, body]\n  %c = icmp.lt u32 %i, %n\n  br %c, body, out\n"
        "body:\n  %j = add u32 %i, 1\n  jmp header\nout:\n  ret i32 0\n}\n"
    ).function("main")
    assert (2, 1) in build_cfg(f).edges()
    dom = function_domtree(f)
    assert dom.idom == {0: None, 1: 0, 2: 1, 3: 1}


def test_dominators_diamond_and_line():
    dom = function_domtree(_diamond())
    assert dom.idom == {0: None, 1: 0, 2: 0, 3: 0}
    line = dominator_tree(CFG.from_edges([0, 1, 2], [(0, 1), (1, 2)]))
    assert line.idom == {0: None, 1: 0, 2: 1}


def test_unreachable_block_raises():
    with pytest.raises(UnreachableBlock) as exc:
        dominator_tree(CFG.from_edges([0, 1, 2], [(0, 1)]))
    assert exc.value.block_id == 2


def _brute_dominators(cfg: CFG) -> dict[int, set[int]]:
    """Intersect the node sets of every simple root-to-node path."""
    paths: dict[int, list[set]] = {n: [] for n in cfg.nodes}

    def walk(node, seen):
        paths[node].append(set(seen))
        for s in cfg.succ[node]:
            if s not in seen:
                walk(s, seen | {s})

    walk(cfg.root, {cfg.root})
    return {n: set.intersection(*ps) for n, ps in paths.items()}


def _random_cfg(rng: random.Random, n: int) -> CFG:
    edges = set()
    for b in range(1, n):
        edges.add((rng.randrange(b), b))  # spanning tree keeps every node reachable
    for _ in range(rng.randint(0, 2 * n)):
        edges.add((rng.randrange(n), rng.randrange(n)))
    return CFG.from_edges(list(range(n)), sorted(edges))


@pytest.mark.parametrize("seed", range(60))
def test_dominators_match_path_enumeration(seed):
    rng = random.Random(seed)
    cfg = _random_cfg(rng, rng.randint(1, 12))
    dom = dominator_tree(cfg)
    brute = _brute_dominators(cfg)
    for n in cfg.nodes:
        assert dom.dominators(n) == brute[n]
    for n in cfg.nodes:
        if n != cfg.root:
            # the immediate dominator is the strict dominator closest to n
            strict = brute[n] - {n}
            assert dom.idom[n] in strict
            assert all(s in brute[dom.idom[n]] for s in strict)


def test_dominance_is_idom_chain():
    rng = random.Random(99)
    for _ in range(20):
        cfg = _random_cfg(rng, 10)
        dom = dominator_tree(cfg)
        for a, b in itertools.product(cfg.nodes, repeat=2):
            chain = [b, *dom.ancestors(b)]
            assert dom.dominates(a, b) == (a in chain)
