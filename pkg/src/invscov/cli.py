"""Command line front end: ``invscov {dump,learn,fuzz,bench,triage}``.

Exit status is 0 on success, 1 on a usage error and 2 when a stage fails
(bad program, missing inputs, empty corpus, ...).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench, pipeline, targets
from .interp.callstack import callstack_hash, format_hash
from .interp.interpreter import execute
from .ir.parser import ParseError, ValidationError, load_program
from .pipeline import MODES, PipelineConfig, PipelineError



class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _add_common(p: argparse.ArgumentParser, program=True) -> None:
    if program:
        p.add_argument("--program", type=Path, required=True, help="IR program file")
    p.add_argument("--out", "--run", dest="out", type=Path, required=True, help="run directory")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="invscov", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dump", help="analyse the program and trace the corpus")
    _add_common(p)
    p.add_argument("--corpus", type=Path, help="directory of training inputs (default: program seeds)")

    p = sub.add_parser("learn", help="mine, prune and deduplicate invariants")
    _add_common(p)
    p.add_argument("--no-dedup", action="store_true", help="emit every check at its own block")

    p = sub.add_parser("fuzz", help="run one fuzzing campaign")
    _add_common(p)
    p.add_argument("--corpus", type=Path, help="seed inputs (default: program seeds)")
    p.add_argument("--mode", choices=MODES, default="invscov")
    p.add_argument("--budget", type=_positive, default=20_000, help="executions")
    p.add_argument("--invariants", type=Path, help="invariants JSON (default: RUN/learn/invariants.json)")

    p = sub.add_parser("bench", help="compare both modes on the benchmark suite")
    _add_common(p, program=False)
    p.add_argument("--targets", nargs="*", help="target names (default: whole suite)")
    p.add_argument("--trials", type=_positive, default=3)
    p.add_argument("--seed-budget", type=_positive, default=5_000, help="executions of the seed run")
    p.add_argument("--budget", type=_positive, default=20_000, help="executions per campaign")

    p = sub.add_parser("triage", help="replay crash inputs and print their call stacks")
    p.add_argument("--program", type=Path, required=True)
    p.add_argument("inputs", nargs="+", type=Path, help="crash files or directories")
    return ap


def _seeds(args, program) -> list[bytes]:
    if args.corpus is not None:
        return pipeline.read_corpus(args.corpus)
    return pipeline.default_seeds(program)


def cmd_dump(args) -> int:
    cfg = PipelineConfig(args.program, args.out, args.corpus, rng_seed=args.seed)
    program = load_program(cfg.program)
    info = pipeline.dump(program, _seeds(args, program), cfg.out_dir)
    print(f"traced {info['inputs']} inputs, {info['records']} records -> {cfg.out_dir / 'dump'}")
    return 0


def cmd_learn(args) -> int:
    cfg = PipelineConfig(args.program, args.out, rng_seed=args.seed, dedup=not args.no_dedup)
    program = load_program(cfg.program)
    result = pipeline.learn(program, cfg.out_dir, cfg.dedup)
    for k, v in result.summary().items():
        print(f"{k}: {v}")
    return 0


def cmd_fuzz(args) -> int:
    cfg = PipelineConfig(
        args.program, args.out, args.corpus, budget=args.budget, rng_seed=args.seed, mode=args.mode
    )
    program = load_program(cfg.program)
    report = None
    if cfg.mode == "invscov":
        path = args.invariants or cfg.out_dir / "learn" / "invariants.json"
        report = pipeline.load_invariants(path)
    result = pipeline.fuzz(program, _seeds(args, program), cfg.out_dir, cfg.mode, cfg.budget, cfg.rng_seed, report)
    totals = result.stats.totals()
    print(
        f"{cfg.mode}: {totals['executions']} execs, corpus {totals['corpus']}, "
        f"{totals['unique_bugs']} unique crashes, {result.execs_per_sec:.0f} execs/s"
    )
    for c in result.crashes:
        print(f"  crash {c.name} {c.kind} at exec {c.execution}")
    return 0


def cmd_bench(args) -> int:
    if args.targets:
        try:
            chosen = [targets.get(n) for n in args.targets]
        except KeyError as exc:
            raise PipelineError(exc.args[0])
    else:
        chosen = targets.suite()
    summaries = bench.run_bench(
        chosen, args.trials, args.seed_budget, args.budget, args.seed, args.out / "bench"
    )
    print(bench.format_table(summaries), end="")
    return 0


def _crash_files(paths) -> list[Path]:
    files = []
    for p in paths:
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.is_file()))
        elif p.is_file():
            files.append(p)
        else:
            raise PipelineError(f"no such file or directory: {p}")
    return files


def cmd_triage(args) -> int:
    program = load_program(args.program)
    rows = []
    for path in _crash_files(args.inputs):
        res = execute(program, path.read_bytes())
        if res.fault is None:
            rows.append({"file": str(path), "outcome": res.outcome})
            print(f"{path.name}: no crash ({res.outcome})")
            continue
        h = format_hash(callstack_hash(res.fault.frames))
        stack = " > ".join(f"{fn}:{label}" for fn, label in res.fault.frames)
        rows.append({"file": str(path), "hash": h, "kind": res.fault.kind, "stack": stack})
        print(f"{path.name}: {h} {res.fault.kind} {stack}")
    buckets = {r["hash"] for r in rows if "hash" in r}
    print(f"{len(buckets)} unique crash(es) in {len(rows)} input(s)")
    return 0


COMMANDS = {
    "dump": cmd_dump,
    "learn": cmd_learn,
    "fuzz": cmd_fuzz,
    "bench": cmd_bench,
    "triage": cmd_triage,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (PipelineError, ParseError, ValidationError, ValueError, OSError) as exc:
        print(f"invscov {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
