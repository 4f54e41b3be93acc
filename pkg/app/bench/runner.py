"""End-to-end benchmark runs: generate, synthesize, check, validate."""

# Import Libraries
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from app.bench.registry import DEFAULT_IDS, Benchmark, get_benchmark
from synth_files.errors import AgSynthError
from synth_files.example_format import dump_examples, record_of
from synth_files.pipeline import run_pipeline
from synth_files.settings import Settings
from synth_files.sketch_format import dump_sketch
from synth_files.synth_states import BenchRow, InputState, OutputState

logger = logging.getLogger(__name__)

TARGET_SETS = 8


def bench_input(b: Benchmark, settings: Settings, algo: str = "incremental", target_sets: int = TARGET_SETS) -> InputState:
    """Pipeline input of a benchmark: its canonical suite plus generated examples.

    Args:
        b (Benchmark): Benchmark to run.
        settings (Settings): Budgets, bounds and seed.
        algo (str): "incremental" or "all-at-once".
        target_sets (int): Production sets the suite should reach.

    Returns:
        InputState: Input of run_pipeline.
    """
    return InputState(
        sketch_text=b.text,
        examples=[record_of(ex) for ex in b.examples()],
        oracle=f"builtin:{b.oracle_name}",
        algo=algo,
        target_sets=target_sets,
        budget=settings.budget(),
        bounds=settings.bounds(),
        tol=max(settings.tol, b.tol),
        seed=settings.seed,
        validation_rounds=settings.validation_rounds,
        debug=settings.debug,
    )


def passes(out: OutputState) -> bool:
    """A run passes when synthesis succeeded, the replay passed every example
    and validation did not end with an open distinguishing input."""
    report = out.report
    return (
        report is not None
        and report.status == "ok"
        and report.passed == report.total
        and out.validation != "open"
    )


def run_benchmark(
    b: Benchmark, settings: Settings, algo: str = "incremental", target_sets: int = TARGET_SETS
) -> Tuple[BenchRow, Optional[OutputState]]:
    """Run one benchmark end to end.

    Returns:
        tuple: The table row, and the pipeline output (None when the run raised).
    """
    row = BenchRow(id=b.id, prods=b.prods, holes=b.holes, algo=algo)
    try:
        out = run_pipeline(bench_input(b, settings, algo, target_sets))
    except (AgSynthError, ValueError) as e:
        logger.error("benchmark %s failed: %s", b.id, e)
        return row, None
    report = out.report
    row = row.model_copy(
        update=dict(
            examples=len(out.examples),
            passed=report.passed if report else 0,
            refutations=report.refutations if report else 0,
            candidates=report.candidates if report else 0,
            validation=out.validation,
            status="PASS" if passes(out) else "FAIL",
        )
    )
    logger.info("benchmark %s: %s", b.id, row.status)
    return row, out


def run_benchmarks(
    ids: Optional[Sequence[str]], settings: Settings, algo: str = "incremental", target_sets: int = TARGET_SETS
) -> List[BenchRow]:
    """Run the named benchmarks, or the default set.

    Raises:
        ValueError: If an id is unknown.
    """
    chosen = [get_benchmark(i) for i in (ids or DEFAULT_IDS)]
    return [run_benchmark(b, settings, algo, target_sets)[0] for b in chosen]


def export_benchmark(b: Benchmark, directory: Path) -> List[Path]:
    """Write `<id>.ag`, `<id>.jsonl` and the reference completion `<id>.ref.ag`.

    Returns:
        list[Path]: The files written.
    """
    directory.mkdir(parents=True, exist_ok=True)
    files = {
        directory / b.filename: b.text,
        directory / f"{b.id}.jsonl": dump_examples(b.examples()),
        directory / f"{b.id}.ref.ag": dump_sketch(b.completed()),
    }
    for path, text in files.items():
        path.write_text(text, encoding="utf-8")
    return list(files)
