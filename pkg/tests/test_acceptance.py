"""End-to-end acceptance checks.

Each test covers one criterion and records a one-line measurement; the
PASS/FAIL lines are printed in the "acceptance criteria" section at the
end of the pytest run.
"""

import json
import random
from collections import Counter
from functools import lru_cache

import pytest
from progen import random_input, random_program
from test_analysis import comparability_oracle
from test_targets import TRIGGERS

from invscov.analysis import compute_comparability, compute_program_ranges
from invscov.bench import run_trial
from invscov.cli import main
from invscov.feedback import CompiledTarget, CoverageMap
from invscov.fuzzer import fuzz_loop
from invscov.interp.interpreter import Hooks, execute
from invscov.ir.parser import parse_program
from invscov.miner import mine, no_dedup
from invscov.targets import get, suite

SUITE = suite()


def mutated(rng: random.Random, pool) -> bytes:
    base = bytearray(rng.choice(pool))
    for _ in range(rng.randint(0, 6)):
        roll = rng.random()
        if roll < 0.6 and base:
            base[rng.randrange(len(base))] = rng.randrange(256)
        elif roll < 0.8:
            base.insert(rng.randrange(len(base) + 1), rng.randrange(256))
        elif base:
            del base[rng.randrange(len(base))]
    return bytes(base)


def inputs_for(target, n: int, seed: int) -> list[bytes]:
    """Half mutated seeds (plus the planted trigger), half uniform bytes."""
    rng = random.Random(f"{target.name}/{seed}")
    pool = list(target.seeds) + [bytes.fromhex(TRIGGERS[target.name])]
    out = []
    for i in range(n):
        if i % 2:
            out.append(bytes(rng.randrange(256) for _ in range(rng.randint(0, 40))))
        else:
            out.append(mutated(rng, pool))
    return out


@lru_cache(maxsize=None)
def trained(name: str):
    """Training corpus from a short edge-only seed run, and what it mines."""
    target = get(name)
    seed_run = fuzz_loop(target.program, target.seeds, None, 5000, 0)
    corpus = [e.data for e in seed_run.corpus]
    return target, corpus, mine(target.program, corpus)


class _Observer(Hooks):
    """Per-visit instruction events paired with the block state at exit."""

    wants_instructions = True

    def __init__(self):
        self.open: dict[int, list] = {}
        self.visits = []  # (BlockState, [InstructionEvent, ...])
        self.bindings = []  # (function, label, name, value)

    def block_enter(self, function, block, activation):
        self.open[activation] = []

    def instruction(self, ev):
        self.open[ev.activation].append(ev)
        if ev.binding is not None:
            self.bindings.append((ev.function, ev.block, *ev.binding))

    def block_exit(self, st):
        self.visits.append((st, self.open.pop(st.activation)))
        for name, v in st.values:
            self.bindings.append((st.function, st.label, name, v))


def observe(program, data):
    obs = _Observer()
    res = execute(program, data, obs)
    return res, obs


def random_programs(n: int):
    for seed in range(n):
        yield seed, parse_program(random_program(1000 + seed, max_instructions=30))


# 1 -------------------------------------------------------------------------


def test_criterion_01_comparability_oracle(verdict):
    checked = mismatches = 0
    for _, p in random_programs(60):
        for f in p.functions:
            assert len(list(f.instructions())) <= 40
            got = set(map(frozenset, compute_comparability(f).classes()))
            checked += 1
            mismatches += got != comparability_oracle(f)
    verdict(f"{checked} random functions, {mismatches} mismatches against the merge closure")
    assert checked >= 100 and mismatches == 0


# 2 -------------------------------------------------------------------------


def test_criterion_02_range_soundness(verdict):
    total = violations = 0
    for t in SUITE:
        ranges = compute_program_ranges(t.program)
        for data in inputs_for(t, 1000, 2):
            _, obs = observe(t.program, data)
            total += 1
            for fn, label, name, v in obs.bindings:
                violations += v not in ranges[fn].at(label, name)
    verdict(f"{total} executions over {len(SUITE)} targets, {violations} out-of-range values")
    assert violations == 0 and total >= 1000 * len(SUITE)


# 3 -------------------------------------------------------------------------


def _violations(program, report, inputs) -> int:
    target = CompiledTarget(program, report, observe=True)
    bad = 0
    for data in inputs:
        res = target.run(data)
        bad += sum(1 for _, _, o in res.outcomes if o)
    return bad


def test_criterion_03_learning_soundness(verdict):
    checks = violations = 0
    for t in SUITE:
        target, corpus, result = trained(t.name)
        train = [d for d in corpus if execute(target.program, d).outcome == "ok"]
        everything = no_dedup(result.learned)
        checks += len(result.learned)
        violations += _violations(target.program, result.report, train)
        violations += _violations(target.program, everything, train)
    verdict(f"{checks} learned invariants re-checked on their training corpora, {violations} violations")
    assert violations == 0


# 4 -------------------------------------------------------------------------


def test_criterion_04_pruning_soundness(verdict):
    pruned = violations = runs = 0
    for t in SUITE:
        target, _, result = trained(t.name)
        pruned += len(result.inviolable)
        inputs = inputs_for(t, 10_000, 4)
        runs += len(inputs)
        violations += _violations(target.program, no_dedup(result.inviolable), inputs)
    verdict(f"{pruned} pruned invariants over {runs} inputs, {violations} violations")
    assert pruned > 0 and violations == 0


# 5 -------------------------------------------------------------------------


def test_criterion_05_dedup_equivalence(verdict):
    runs = differ = reusing = 0
    for t in SUITE:
        target, _, result = trained(t.name)
        report = result.report
        reusing += len(report.sites) - len(report.emitted())
        dedup = CompiledTarget(target.program, report)
        local = CompiledTarget(target.program, report.localized())
        for data in inputs_for(t, 1000, 5):
            a = CoverageMap.from_hits(dedup.run(data).hits)
            b = CoverageMap.from_hits(local.run(data).hits)
            runs += 1
            differ += bytes(a.counts) != bytes(b.counts)
    verdict(f"{runs} inputs, {reusing} reusing check sites, {differ} differing maps")
    assert reusing > 0 and differ == 0


# 6 and 7 -------------------------------------------------------------------


def _executions():
    """Suite targets on mutated inputs, then random programs on random inputs."""
    for t in SUITE:
        for data in inputs_for(t, 200, 6):
            yield t.program, data
    for seed, p in random_programs(60):
        rng = random.Random(seed)
        for _ in range(15):
            yield p, random_input(rng)


def test_criterion_06_store_values_in_block_state(verdict):
    writes = missing = 0
    for program, data in _executions():
        _, obs = observe(program, data)
        for st, events in obs.visits:
            values = {v for _, v in st.values}
            for ev in events:
                if ev.write is not None:
                    writes += 1
                    missing += ev.write[2] not in values
    verdict(f"{writes} stores, {missing} values absent from the block state")
    assert writes > 0 and missing == 0


def reconstruct(program, st) -> list:
    """The (binding, write) stream of one block visit from its exit state."""
    f = program.function(st.function)
    block = f.block(st.label)
    env = st.as_dict()
    stream = []
    for ins in block.body:
        if ins.opcode == "store":
            addr, val = ins.operands
            a = program.globals[addr.name].address if not isinstance(addr, str) else env[addr]
            stream.append((None, (a, ins.type.size, env[val])))
        elif ins.result is not None:
            stream.append(((ins.result, env[ins.result]), None))
    return stream


def test_criterion_07_block_state_reconstructs_instruction_stream(verdict):
    visits = events = mismatched = executions = 0
    for program, data in _executions():
        res, obs = observe(program, data)
        if res.outcome != "ok":
            continue
        executions += 1
        for st, evs in obs.visits:
            seen = [(e.binding, e.write) for e in evs if e.binding or e.write]
            visits += 1
            events += len(seen)
            mismatched += seen != reconstruct(program, st)
    verdict(f"{executions} executions, {visits} block visits, {events} events, {mismatched} mismatches")
    assert visits > 0 and mismatched == 0


# 8 -------------------------------------------------------------------------


def test_criterion_08_no_violation_means_plain_map(verdict):
    clean = differ = 0
    for t in SUITE:
        target, _, result = trained(t.name)
        plain = CompiledTarget(target.program)
        inv = CompiledTarget(target.program, result.report, observe=True)
        for data in inputs_for(t, 500, 8):
            r = inv.run(data)
            if any(o for _, _, o in r.outcomes):
                continue
            clean += 1
            differ += r.hits != plain.run(data).hits
    verdict(f"{clean} executions without violations, {differ} differing maps")
    assert clean > 0 and differ == 0


# 9 -------------------------------------------------------------------------

STATE_BUGS = [t.name for t in SUITE if t.state_bug]


@pytest.mark.parametrize("name", STATE_BUGS)
def test_criterion_09_state_bug_differential(name, verdict):
    target = get(name)
    found = Counter()
    at = []
    for trial in range(10):
        r = run_trial(target, trial, trial, 5000, 200_000, stop_on_planted=True)
        for mode, ex in r.planted_found.items():
            found[mode] += ex is not None
        if r.planted_found["invscov"] is not None:
            at.append(r.planted_found["invscov"])
    verdict(
        f"{name}: invscov {found['invscov']}/10, edge-only {found['edge-only']}/10"
        f" (invscov median find at exec {sorted(at)[len(at) // 2] if at else '-'})"
    )
    assert found["invscov"] >= 8 and found["edge-only"] <= 2


# 10 ------------------------------------------------------------------------


def test_criterion_10_overhead_envelope(tmp_path, capsys, verdict):
    assert main(["bench", "--out", str(tmp_path), "--trials", "3"]) == 0
    capsys.readouterr()
    data = json.loads((tmp_path / "bench" / "bench.json").read_text())
    median = data["suite_median_overhead"]
    per = ", ".join(f"{t['target']} {t['overhead']:.2f}" for t in data["targets"])
    verdict(f"suite median edge-only:invscov execs/sec = {median:.2f}x ({per})")
    assert median <= 3.0


# 11 ------------------------------------------------------------------------


def _pipeline(out, program) -> dict:
    common = ["--program", str(program), "--out", str(out), "--seed", "7"]
    for argv in (
        ["dump", *common],
        ["learn", *common],
        ["fuzz", *common, "--mode", "edge-only", "--budget", "20000"],
        ["fuzz", *common, "--mode", "invscov", "--budget", "20000"],
    ):
        assert main(argv) == 0
    got = {"invariants": (out / "learn" / "invariants.json").read_bytes()}
    for mode in ("edge-only", "invscov"):
        d = out / f"fuzz-{mode}"
        got[mode] = (
            sorted(p.name for p in (d / "corpus").iterdir()),
            sorted(p.name for p in (d / "crashes").iterdir()),
            (d / "stats.jsonl").read_bytes(),
            json.loads((d / "summary.json").read_text()),
        )
    return got


@pytest.mark.parametrize("name", ["keyword", "magic_chain"])
def test_criterion_11_determinism(name, tmp_path, capsys, verdict):
    path = get(name).path
    a = _pipeline(tmp_path / "a", path)
    b = _pipeline(tmp_path / "b", path)
    capsys.readouterr()
    same = [k for k in a if a[k] == b[k]]
    verdict(f"{name}: identical {', '.join(same)} ({len(a['invscov'][0])} corpus entries)")
    assert a == b
