"""Command-line frontend.

    python -m app.cli synth --sketch b10.ag --examples b10.jsonl --seed 7 --out b10.done.ag
    python -m app.cli gen-examples --sketch b10.ag --oracle builtin:forward-diff --target-sets 8
    python -m app.cli check --sketch b10.done.ag --examples b10.jsonl
    python -m app.cli coverage --sketch b10.ag "x^2+4*x+5"
    python -m app.cli validate --sketch b10.ag --examples b10.jsonl --oracle builtin:forward-diff --fix
    python -m app.cli bench --only b1
    python -m app.cli bench export fixtures/

Exit codes: 0 success, 1 usage or IO error, 2 synthesis or check failure,
3 oracle failure. Reports go to stdout, log records to stderr.
"""

# Import Libraries
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from app.bench.registry import DEFAULT_IDS, get_benchmark, registry
from app.bench.runner import TARGET_SETS, export_benchmark, run_benchmarks
from app.reports import coverage_lines, render_bench, render_check, render_run
from synth_files.errors import AgSynthError, OracleError
from synth_files.example_format import dump_examples, example_of, load_examples, record_of
from synth_files.dsl import parse_expr
from synth_files.examplegen import FOUND, derivation_coverage, generate_suite, validate
from synth_files.grammar import used_holes
from synth_files.oracles import OracleHandle
from synth_files.pipeline import run_pipeline
from synth_files.settings import Settings, load_settings
from synth_files.sketch_format import load_sketch
from synth_files.synth_states import InputState
from synth_files.synthesis import Example, check_examples

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2
EXIT_ORACLE = 3

# Flag name -> Settings field
_OVERRIDES = {
    "dsl_size_max": "dsl_size_max",
    "max_candidates": "max_candidates",
    "max_refutations": "max_refutations",
    "seed": "seed",
    "tol": "tol",
    "max_depth": "max_depth",
    "validation_rounds": "validation_rounds",
}


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str, text: str) -> None:
    """Write through a temporary file so readers never see partial output."""
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, target)


def _examples(path: Optional[str]) -> List[Example]:
    return load_examples(_read(path)) if path else []


def _settings(args: argparse.Namespace) -> Settings:
    settings = load_settings()
    overrides = {field: getattr(args, flag) for flag, field in _OVERRIDES.items() if getattr(args, flag, None) is not None}
    if getattr(args, "debug", False):
        overrides["debug"] = True
    return Settings(**{**settings.model_dump(), **overrides}) if overrides else settings


def _pipeline_input(args: argparse.Namespace, settings: Settings, examples: Sequence[Example], rounds: int) -> InputState:
    return InputState(
        sketch_text=_read(args.sketch),
        examples=[record_of(ex) for ex in examples],
        oracle=args.oracle,
        algo=args.algo,
        target_sets=args.target_sets or 0,
        budget=settings.budget(),
        bounds=settings.bounds(),
        tol=settings.tol,
        seed=settings.seed,
        validation_rounds=rounds,
        debug=settings.debug,
    )


def cmd_synth(args: argparse.Namespace, settings: Settings) -> int:
    """Complete a sketch from examples, generated ones included when an oracle is given."""
    out = run_pipeline(_pipeline_input(args, settings, _examples(args.examples), 0))
    print(render_run(out.report), end="")
    if out.report.status != "ok":
        return EXIT_FAILED
    if args.out:
        _write(args.out, out.completed_text)
    else:
        print(out.completed_text, end="")
    return EXIT_OK


def cmd_gen_examples(args: argparse.Namespace, settings: Settings) -> int:
    """Generate a coverage-guided example suite labelled by the oracle."""
    s = load_sketch(_read(args.sketch))
    oracle = OracleHandle.parse(args.oracle)
    suite = generate_suite(s, oracle, args.target_sets, seed=settings.seed, max_depth=settings.max_depth)
    text = dump_examples(suite.examples)
    summary = "\n".join(coverage_lines(suite.coverage.summary(s))) + "\n"
    if args.out:
        _write(args.out, text)
        print(f"examples: {len(suite.examples)}")
        print(summary, end="")
    else:
        print(text, end="")
        sys.stderr.write(summary)
    return EXIT_OK


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    """Replay examples on a hole-free grammar."""
    g = load_sketch(_read(args.sketch))
    open_holes = sorted(used_holes(g))
    if open_holes:
        raise ValueError(f"check needs a hole-free grammar; open holes: {', '.join(open_holes)}")
    results = check_examples(g, _examples(args.examples), settings.tol)
    print(render_check(results), end="")
    return EXIT_OK if all(err is None for _, _, err in results) else EXIT_FAILED


def cmd_coverage(args: argparse.Namespace, settings: Settings) -> int:
    """Derivation coverage of example inputs and extra strings."""
    s = load_sketch(_read(args.sketch))
    strings = [ex.input for ex in _examples(args.examples)] + list(args.strings)
    if not strings:
        raise ValueError("coverage needs --examples or input strings")
    print("\n".join(coverage_lines(derivation_coverage(s, strings))))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    """Synthesize, then look for a distinguishing input; --fix feeds it back."""
    initial = _examples(args.examples)
    if args.fix:
        out = run_pipeline(_pipeline_input(args, settings, initial, settings.validation_rounds))
        print(render_run(out.report, out.validation), end="")
        known = [record_of(ex) for ex in initial]
        added = [example_of(r) for r in out.examples if r not in known]
        if args.examples and added:
            text = _read(args.examples)
            if text and not text.endswith("\n"):
                text += "\n"
            _write(args.examples, text + dump_examples(added))
        if out.report.status != "ok":
            return EXIT_FAILED
        if args.out:
            _write(args.out, out.completed_text)
        return EXIT_OK if out.validation != "open" else EXIT_FAILED
    out = run_pipeline(_pipeline_input(args, settings, initial, 0))
    if out.report.status != "ok":
        print(render_run(out.report), end="")
        return EXIT_FAILED
    s = load_sketch(_read(args.sketch))
    ready = {h: parse_expr(body, s.hole(h).signature) for h, body in out.report.bodies.items()}
    examples = [example_of(r) for r in out.examples]
    outcome = validate(
        s,
        ready,
        examples,
        s.dsl,
        OracleHandle.parse(args.oracle),
        settings.bounds(),
        seed=settings.seed,
        budget=settings.budget(),
        tol=settings.tol,
    )
    print(f"validation: {outcome.status}")
    print(f"alternates: {outcome.alternates}")
    print(f"tried: {outcome.tried}")
    if outcome.status == FOUND:
        print(f"holes: {', '.join(outcome.holes)}")
        print(f"example: {outcome.example}")
        print(dump_examples([outcome.example]), end="")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    """Run the benchmarks end to end, or export their fixtures."""
    ids = args.only or None
    if args.bench_cmd == "export":
        for bench_id in ids or list(registry()):
            for path in export_benchmark(get_benchmark(bench_id), Path(args.directory)):
                print(path)
        return EXIT_OK
    rows = run_benchmarks(ids or DEFAULT_IDS, settings, args.algo, args.target_sets or TARGET_SETS)
    print(render_bench(rows), end="")
    return EXIT_OK if all(row.status == "PASS" for row in rows) else EXIT_FAILED


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs")
    common.add_argument("--algo", choices=["incremental", "all-at-once"], default="incremental")
    common.add_argument("--dsl-size-max", type=int, help="largest DSL body size per hole")
    common.add_argument("--max-candidates", type=int, help="candidates per synthesize call")
    common.add_argument("--max-refutations", type=int, help="refutation cap")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float, help="real comparison tolerance")
    common.add_argument("--max-depth", type=int, help="depth budget of the string sampler")
    common.add_argument("--target-sets", type=int, help="production sets to generate")
    common.add_argument("--validation-rounds", type=int, help="max distinguishing examples appended")
    common.add_argument("--debug", action="store_true", help="check the loop invariant every iteration")
    return common


def build_parser() -> argparse.ArgumentParser:
    """The agsynth argument parser."""
    common = _common()
    parser = _Parser(prog="agsynth", description="Synthesize semantic actions of attribute grammar sketches.")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", parents=[common], help="complete a sketch from examples")
    synth.add_argument("--sketch", required=True)
    synth.add_argument("--examples")
    synth.add_argument("--oracle", help="builtin:NAME or cmd:SHELL, used to generate examples")
    synth.add_argument("--out", help="completed grammar file")
    synth.set_defaults(func=cmd_synth)

    gen = commands.add_parser("gen-examples", parents=[common], help="generate a coverage-guided suite")
    gen.add_argument("--sketch", required=True)
    gen.add_argument("--oracle", required=True)
    gen.add_argument("--out", help="examples file; stdout when absent")
    gen.set_defaults(func=cmd_gen_examples, target_sets=TARGET_SETS)

    check = commands.add_parser("check", parents=[common], help="replay examples on a completed grammar")
    check.add_argument("--sketch", required=True)
    check.add_argument("--examples", required=True)
    check.set_defaults(func=cmd_check)

    coverage = commands.add_parser("coverage", parents=[common], help="derivation coverage of strings")
    coverage.add_argument("--sketch", required=True)
    coverage.add_argument("--examples")
    coverage.add_argument("strings", nargs="*")
    coverage.set_defaults(func=cmd_coverage)

    val = commands.add_parser("validate", parents=[common], help="search for a distinguishing input")
    val.add_argument("--sketch", required=True)
    val.add_argument("--examples")
    val.add_argument("--oracle", required=True)
    val.add_argument("--fix", action="store_true", help="append distinguishing examples and resynthesize")
    val.add_argument("--out", help="completed grammar file, with --fix")
    val.set_defaults(func=cmd_validate)

    bench = commands.add_parser("bench", parents=[common], help="run the built-in benchmarks")
    bench.add_argument("--only", action="append", metavar="ID", help="benchmark id; repeatable")
    bench_commands = bench.add_subparsers(dest="bench_cmd")
    export = bench_commands.add_parser("export", help="write sketch, examples and reference files")
    export.add_argument("directory")
    bench.set_defaults(func=cmd_bench)
    return parser


def _configure_logging(settings: Settings, verbose: int) -> None:
    level = {0: settings.log_level.upper(), 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command.

    Returns:
        int: Process exit code.
    """
    try:
        args = build_parser().parse_args(argv)
        settings = _settings(args)
    except UsageError as e:
        sys.stderr.write(f"agsynth: error: {e}\n")
        return EXIT_USAGE
    except ValueError as e:
        sys.stderr.write(f"agsynth: invalid setting: {e}\n")
        return EXIT_USAGE
    _configure_logging(settings, args.verbose)
    try:
        return args.func(args, settings)
    except OracleError as e:
        request = f" on request {e.request}" if e.request else ""
        sys.stderr.write(f"agsynth: oracle failure{request}: {e}\n")
        return EXIT_ORACLE
    except (AgSynthError, ValueError, OSError) as e:
        sys.stderr.write(f"agsynth: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
