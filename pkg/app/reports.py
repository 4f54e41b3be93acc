# Import Libraries
from typing import Iterable, List, Optional, Tuple

import pandas as pd

from synth_files.synth_states import BenchRow, CoverageSummary, RunReport
from synth_files.synthesis import Example
from synth_files.values import Value, show_value

BENCH_COLUMNS = ["id", "prods", "holes", "examples", "passed", "#R", "candidates", "algo", "validation", "status"]


def coverage_lines(cov: CoverageSummary) -> List[str]:
    """Coverage summary as report lines.

    Args:
        cov (CoverageSummary): Summary to print.

    Returns:
        list[str]: Production sets, covered productions and the log2 coverage fraction.
    """
    covered = ", ".join(str(p) for p in cov.covered)
    return [
        f"production sets: {cov.q1_count}",
        f"covered: {len(cov.covered)}/{cov.total_prods} [{covered}]",
        f"log2 coverage: {cov.fraction_log2:.4f}",
    ]


def render_run(report: RunReport, validation: Optional[str] = None) -> str:
    """Fixed-width text for one synthesis run.

    Args:
        report (RunReport): Run outcome.
        validation (Optional[str]): Validation verdict, when validation ran.

    Returns:
        str: Status line, the body table and the counters.
    """
    lines = [f"status: {report.status}" + (f" ({report.message})" if report.message else "")]
    if report.bodies:
        table = pd.DataFrame({"hole": list(report.bodies), "body": list(report.bodies.values())})
        lines.append(table.to_string(index=False, justify="left"))
    lines.append(f"passed: {report.passed}/{report.total}")
    lines.append(f"refutations: {report.refutations}")
    lines.append(f"candidates: {report.candidates}")
    lines.append(f"algo: {report.algo}")
    lines.append(f"seed: {report.seed}")
    if validation is not None:
        lines.append(f"validation: {validation}")
    if report.coverage is not None:
        lines += coverage_lines(report.coverage)
    return "\n".join(lines) + "\n"


def bench_frame(rows: Iterable[BenchRow]) -> pd.DataFrame:
    """Benchmark rows as a DataFrame in table column order."""
    records = [row.model_dump() for row in rows]
    frame = pd.DataFrame.from_records(records, columns=list(BenchRow.model_fields))
    return frame.rename(columns={"refutations": "#R"})[BENCH_COLUMNS]


def render_bench(rows: Iterable[BenchRow]) -> str:
    """The benchmark table, one row per benchmark."""
    return bench_frame(rows).to_string(index=False) + "\n"


def render_check(results: Iterable[Tuple[Example, Optional[Value], Optional[str]]]) -> str:
    """Replay outcomes, one row per example, then the pass count."""
    results = list(results)
    rows = [
        {
            "input": ex.input,
            "context": ", ".join(f"{k}={show_value(v)}" for k, v in ex.context),
            "expected": show_value(ex.output),
            "got": show_value(got) if got is not None else "-",
            "ok": "yes" if err is None else "no",
        }
        for ex, got, err in results
    ]
    frame = pd.DataFrame(rows, columns=["input", "context", "expected", "got", "ok"])
    passed = sum(1 for _, _, err in results if err is None)
    return frame.to_string(index=False) + f"\npassed: {passed}/{len(results)}\n"
