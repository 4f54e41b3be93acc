from app.bench.registry import DEFAULT_IDS, get_benchmark, registry
from app.bench.reference import ORACLES
from app.bench.runner import bench_input, export_benchmark, passes
from app.reports import BENCH_COLUMNS, coverage_lines, render_bench, render_check, render_run
from synth_files.example_format import load_examples
from synth_files.grammar import used_holes
from synth_files.settings import Settings
from synth_files.sketch_format import load_sketch
from synth_files.synth_states import BenchRow, CoverageSummary, OutputState, RunReport
from synth_files.synthesis import Example, check_examples
from synth_files.values import Dual, Int, Tag, value_eq
from synth_files.errors import OracleDomainError, OracleError
from pathlib import Path
import tempfile
import unittest


class TestBench(unittest.TestCase):

    # Setup tests with default settings
    def setUp(self):
        self.settings = Settings()
        return super().setUp()

    # The default set and the extension are registered
    def test_registry(self):
        self.assertEqual(set(registry()), set(DEFAULT_IDS) | {"b10x"})
        self.assertEqual(get_benchmark("b10").prods, 11)
        self.assertEqual(get_benchmark("b10").holes, 6)
        self.assertEqual(get_benchmark("b1").prods, 5)
        with self.assertRaises(ValueError):
            get_benchmark("b9")

    # Every known completion reproduces its canonical suite
    def test_reference_completions(self):
        for bench_id, b in registry().items():
            with self.subTest(bench=bench_id):
                g = b.completed()
                self.assertEqual(used_holes(g), set())
                failures = [(str(ex), err) for ex, _, err in check_examples(g, b.examples(), b.tol) if err]
                self.assertEqual(failures, [])

    # Forward differentiation values of the canonical strings
    def test_forward_diff_oracle(self):
        oracle = ORACLES["forward-diff"]
        cases = [
            ("x^3", 2, Dual(8.0, 12.0)),
            ("x+x", 13, Dual(26.0, 2.0)),
            ("3-x", 7, Dual(-4.0, -1.0)),
            ("x*x", 4, Dual(16.0, 8.0)),
            ("sin(x^2)", 3, Dual(0.41, -5.47)),
            ("cos(x^2)", 2, Dual(-0.65, 3.02)),
            ("x*cos(x)", 4, Dual(-2.61, 2.37)),
            ("x^2+4*x+5", 3, Dual(26.0, 10.0)),
        ]
        for text, x, expected in cases:
            with self.subTest(text=text):
                self.assertTrue(value_eq(oracle(text, {"x": Int(x)}), expected, 1e-2))

    # Calculator oracles
    def test_calculator_oracles(self):
        cases = [
            ("count-ones", "0111", Int(3)),
            ("bin2int", "0110", Int(6)),
            ("prefix", "- + 1 2 3", Int(0)),
            ("postfix", "2 3 4 * +", Int(14)),
            ("calc", "8 - 2 * 3", Int(2)),
            ("calc", "9 / 2", Int(4)),
            ("ifelse", "if(3+4 == 3) then 44; else 73;", Int(73)),
            ("ifelse", "if(2 == 2) then 1; else 0;", Int(1)),
            ("layout", "int x, y[2];", Int(12)),
            ("layout", "char s[5], t;", Int(6)),
        ]
        for name, text, expected in cases:
            with self.subTest(oracle=name, text=text):
                self.assertEqual(ORACLES[name](text, {}), expected)

    # Currency amounts are reported in USD
    def test_currency_oracle(self):
        value = ORACLES["currency"]("USD 3 + EUR 8", {})
        self.assertTrue(value_eq(value, Tag("USD", 12.28), 1e-2))
        self.assertTrue(value_eq(ORACLES["currency"]("EUR 5", {}), Tag("USD", 5.8), 1e-2))

    # Oracle failures
    def test_oracle_errors(self):
        with self.assertRaises(OracleDomainError):
            ORACLES["forward-diff"]("x^0", {"x": Int(0)})
        with self.assertRaises(OracleError):
            ORACLES["forward-diff"]("x+", {"x": Int(1)})
        with self.assertRaises(OracleError):
            ORACLES["prefix"]("+ x 1", {})
        with self.assertRaises(OracleError):
            ORACLES["count-ones"]("102", {})

    # Pipeline input of a benchmark
    def test_bench_input(self):
        b6 = get_benchmark("b6")
        state = bench_input(b6, self.settings, "all-at-once", 3)
        self.assertEqual(state.oracle, "builtin:currency")
        self.assertEqual(state.tol, 1e-2)
        self.assertEqual(len(state.examples), len(b6.samples))
        self.assertEqual(state.algo, "all-at-once")
        self.assertEqual(state.target_sets, 3)
        self.assertEqual(state.budget.max_size, self.settings.dsl_size_max)

    # A pass needs a full replay and no open distinguishing input
    def test_passes(self):
        report = RunReport(passed=3, total=3)
        self.assertTrue(passes(OutputState(report=report, validation="unique")))
        self.assertTrue(passes(OutputState(report=report, validation="fixed(1)")))
        self.assertFalse(passes(OutputState(report=report, validation="open")))
        self.assertFalse(passes(OutputState(report=RunReport(passed=2, total=3))))
        self.assertFalse(passes(OutputState(report=RunReport(status="unsat"))))
        self.assertFalse(passes(OutputState()))

    # Export writes the sketch, its suite and the reference completion
    def test_export(self):
        b = get_benchmark("b10")
        with tempfile.TemporaryDirectory() as tmp:
            paths = export_benchmark(b, Path(tmp) / "fixtures")
            self.assertEqual([p.name for p in paths], ["b10.ag", "b10.jsonl", "b10.ref.ag"])
            self.assertEqual(load_sketch(paths[0].read_text(encoding="utf-8")).productions, b.sketch.productions)
            self.assertEqual(load_examples(paths[1].read_text(encoding="utf-8")), b.examples())
            ref = load_sketch(paths[2].read_text(encoding="utf-8"))
            self.assertEqual(used_holes(ref), set())

    # The benchmark table has the fixed column order
    def test_render_bench(self):
        rows = [BenchRow(id="b1", prods=5, holes=1, examples=7, passed=7, refutations=1, candidates=42, validation="unique", status="PASS")]
        lines = render_bench(rows).splitlines()
        self.assertEqual(lines[0].split(), BENCH_COLUMNS)
        self.assertEqual(lines[1].split(), ["b1", "5", "1", "7", "7", "1", "42", "incremental", "unique", "PASS"])

    # Run reports list bodies and counters
    def test_render_run(self):
        report = RunReport(bodies={"h1": "add(a_1, a_2)"}, passed=7, total=7, refutations=1, candidates=12, message="completed 1 holes")
        text = render_run(report, "unique")
        self.assertTrue(text.startswith("status: ok (completed 1 holes)\n"))
        self.assertIn("add(a_1, a_2)", text)
        self.assertIn("passed: 7/7\n", text)
        self.assertIn("validation: unique\n", text)

    # Coverage lines
    def test_coverage_lines(self):
        cov = CoverageSummary(q1_count=1, covered=[1, 2], total_prods=11, fraction_log2=-11.0)
        self.assertEqual(coverage_lines(cov), ["production sets: 1", "covered: 2/11 [1, 2]", "log2 coverage: -11.0000"])

    # Replay tables end with the pass count
    def test_render_check(self):
        ex = Example.of("x*x", {"x": Int(4)}, Dual(16.0, 8.0))
        text = render_check([(ex, Dual(16.0, 8.0), None), (ex, None, "no parse")])
        self.assertTrue(text.endswith("passed: 1/2\n"))
        self.assertIn("16 + 8ε", text)
        self.assertIn("x=4", text)
