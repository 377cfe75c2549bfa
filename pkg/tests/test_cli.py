import json
import re

import pytest

from invscov.cli import main
from invscov.targets import get

TOY = """\
; reads two bytes; x feeds a later block
program entry=@main seed=5
global @out 8

func @main() -> i32 {
entry:
  %z = const u32 0
  %o = const u32 1
  %x = input_read u8 %z
  %c = input_read u8 %o
  %big = icmp.lt u8 200, %c
  br %big, boom, mid
boom:
  bug
mid:
  %wx = cast u32 %x
  %y = add u32 %wx, 1
  store u32 @out, %y
  jmp done
done:
  %r = cast i32 %y
  ret i32 %r
}
"""


@pytest.fixture
def toy(tmp_path):
    prog = tmp_path / "toy.ir"
    prog.write_text(TOY)
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for i in range(10):
        (corpus / f"in{i}").write_bytes(bytes([3 + i % 7, i]))
    return prog, corpus, tmp_path / "run"


def run(*args):
    return main([str(a) for a in args])


def test_dump_writes_decls_and_dtrace(toy):
    prog, corpus, out = toy
    assert run("dump", "--program", prog, "--corpus", corpus, "--out", out) == 0
    decls = (out / "dump" / "program.decls").read_text()
    assert decls.count(":::ENTER\n") == 4 and decls.count(":::EXIT0\n") == 4
    dtrace = (out / "dump" / "program.dtrace").read_text()
    # 10 inputs, three blocks each (entry, mid, done)
    assert dtrace.count(":::EXIT0\n") == 30
    assert json.loads((out / "dump" / "analysis.json").read_text())["entry"] == "main"


def test_empty_corpus_is_an_error(toy, tmp_path, capsys):
    prog, _, out = toy
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run("dump", "--program", prog, "--corpus", empty, "--out", out) == 2
    assert "corpus empty" in capsys.readouterr().err


def test_faulting_corpus_input_is_skipped(toy, caplog):
    prog, corpus, out = toy
    (corpus / "crash").write_bytes(b"\x05\xff")
    with caplog.at_level("WARNING"):
        assert run("dump", "--program", prog, "--corpus", corpus, "--out", out) == 0
    assert "skipped" in caplog.text
    assert (out / "dump" / "program.dtrace").read_text().count(":::EXIT0\n") == 30


def test_learn_report(toy):
    prog, corpus, out = toy
    run("dump", "--program", prog, "--corpus", corpus, "--out", out)
    assert run("learn", "--program", prog, "--out", out) == 0
    report = (out / "learn" / "report.txt").read_text()
    checks = report.split("\nchecks\n")[1]
    assert "main.entry: x >= 3" in checks and "main.entry: x <= 9" in checks
    pruned = report.split("pruned: inviolable\n")[-1].split("\n\n")[0]
    assert "c >= 0" in pruned
    # wx = x is seen in mid and done; the copy in done reuses mid's outcome
    line = next(l for l in checks.splitlines() if "main.mid: y <= 10" in l)
    assert "(reused by main.done)" in line
    items = json.loads((out / "learn" / "invariants.json").read_text())
    assert all(set(it) == {"id", "ppt", "kind", "vars", "params", "emission_site"} for it in items)
    summary = json.loads((out / "learn" / "summary.json").read_text())
    assert summary["reusing_sites"] >= 1


def test_learn_without_dump_fails(toy):
    prog, _, out = toy
    assert run("learn", "--program", prog, "--out", out) == 2


def test_fuzz_edge_only_finds_crash(toy):
    prog, corpus, out = toy
    assert run("fuzz", "--program", prog, "--corpus", corpus, "--out", out,
               "--mode", "edge-only", "--budget", 10_000) == 0
    crashes = list((out / "fuzz-edge-only" / "crashes").iterdir())
    assert crashes
    assert all(len(p.name) == 16 for p in crashes)
    names = [p.name for p in (out / "fuzz-edge-only" / "corpus").iterdir()]
    assert names and all(n[:6].isdigit() and n[6] == "-" for n in names)


def test_fuzz_is_reproducible(toy, tmp_path):
    prog, corpus, out = toy
    stats = []
    for d in ("a", "b"):
        run("fuzz", "--program", prog, "--corpus", corpus, "--out", tmp_path / d,
            "--mode", "edge-only", "--budget", 3000, "--seed", 9)
        stats.append((tmp_path / d / "fuzz-edge-only" / "stats.jsonl").read_bytes())
    assert stats[0] == stats[1]


def test_invscov_fuzz_needs_only_the_invariants_file(toy):
    import shutil

    prog, corpus, out = toy
    assert run("fuzz", "--program", prog, "--corpus", corpus, "--out", out, "--budget", 100) == 2
    run("dump", "--program", prog, "--corpus", corpus, "--out", out)
    run("learn", "--program", prog, "--out", out)
    shutil.rmtree(out / "dump")
    assert run("fuzz", "--program", prog, "--corpus", corpus, "--out", out, "--budget", 2000) == 0
    assert (out / "fuzz-invscov" / "summary.json").exists()


def test_triage(toy, capsys):
    prog, corpus, out = toy
    run("fuzz", "--program", prog, "--corpus", corpus, "--out", out, "--mode", "edge-only", "--budget", 5000)
    capsys.readouterr()
    assert run("triage", "--program", prog, out / "fuzz-edge-only" / "crashes") == 0
    text = capsys.readouterr().out
    assert "bug-instruction main:boom" in text
    assert "unique crash" in text


def test_bench_table(tmp_path, capsys):
    assert run("bench", "--out", tmp_path, "--targets", "divider", "keyword", "--trials", 3,
               "--seed-budget", 300, "--budget", 600) == 0
    text = capsys.readouterr().out
    header = text.splitlines()[0].split("  ")
    assert [h.strip() for h in header if h.strip()] == [
        "target", "edge-only bugs", "invscov bugs", "intersection", "overhead"]
    rows = text.splitlines()[1:3]
    assert [r.split()[0] for r in rows] == ["divider", "keyword"]
    assert all(re.fullmatch(r"\d+\.\d\dx", r.split()[-1]) for r in rows)
    assert "suite median overhead:" in text
    data = json.loads((tmp_path / "bench" / "bench.json").read_text())
    assert [len(t["trials"]) for t in data["targets"]] == [3, 3]


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["fuzz", "--program", "x.ir", "--out", "o", "--budget", "0"])
    assert exc.value.code == 1


def test_bad_program_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ir"
    bad.write_text("program entry=@main\nfunc @main() -> i32 {\nentry:\n  %x = const i32 1\n  %x = const i32 2\n  ret i32 %x\n}\n")
    assert run("dump", "--program", bad, "--out", tmp_path / "r") == 2
    assert "assigned only once" in capsys.readouterr().err
    assert run("bench", "--out", tmp_path, "--targets", "nope") == 2


def test_default_seeds_come_from_program(tmp_path):
    t = get("divider")
    assert run("dump", "--program", t.path, "--out", tmp_path) == 0
    text = (tmp_path / "dump" / "program.dtrace").read_text()
    assert text.count("main.entry:::EXIT0") == len(t.seeds)
