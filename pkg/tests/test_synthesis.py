from synth_files.synthesis import (
    Example,
    all_at_once,
    check_examples,
    derivation_congruent,
    get_sketchy_prods,
    ready_prods,
    select_example,
    synth_attr_grammar,
    synth_holes,
)
from synth_files.grammar import complete
from synth_files.dsl import parse_expr
from synth_files.sketch_format import load_sketch
from synth_files.synth_states import SynthesisBudget
from synth_files.values import Dual, Int, Real
from synth_files.errors import ExampleError
from app.bench.registry import get_benchmark
import math
import unittest


WAVE = """
%token num /[0-9]+/ int
%hole h1(real) -> real : C
%dsl C : real ::= param | lit | add(C, C) | mul(C, C) | sin(C)
S -> N     { output N.v ; }
N -> num   { N.v = ?h1(real(getVal(num))) ; }
"""


class TestSynthesis(unittest.TestCase):

    # Setup tests with the bit string benchmarks
    def setUp(self):
        self.b1 = get_benchmark("b1")
        self.b2 = get_benchmark("b2")
        self.small = SynthesisBudget(max_size=5)
        return super().setUp()

    def _passes_all(self, s, ready, examples, tol=1e-6):
        g = complete(s, ready)
        return all(err is None for _, _, err in check_examples(g, examples, tol))

    # Examples print with their context
    def test_example_str(self):
        ex = Example.of("x+x", {"x": Int(13)}, Dual(26.0, 2.0))
        self.assertEqual(str(ex), "x+x {x=13}")
        self.assertEqual(ex.beta, {"x": Int(13)})
        self.assertEqual(ex.context_json(), '{"x": {"int": 13}}')

    # The bit counter completes incrementally
    def test_synth_attr_grammar(self):
        examples = self.b1.examples()
        result = synth_attr_grammar(self.b1.sketch, examples, budget=self.small)
        self.assertTrue(result.ok)
        self.assertEqual(set(result.ready), {"h1"})
        self.assertTrue(self._passes_all(self.b1.sketch, result.ready, examples))

    # A body frozen on one example is evicted when a later one refutes it
    def test_refutation(self):
        examples = [Example.of("11", {}, Int(3)), Example.of("10", {}, Int(2))]
        result = synth_attr_grammar(self.b2.sketch, examples, budget=self.small)
        self.assertTrue(result.ok)
        self.assertGreaterEqual(result.refutations, 1)
        self.assertGreaterEqual(result.evictions["h1"], 1)
        self.assertTrue(self._passes_all(self.b2.sketch, result.ready, examples))

    # All examples in one synthesize call
    def test_all_at_once(self):
        examples = self.b2.examples()
        result = all_at_once(self.b2.sketch, examples, budget=self.small)
        self.assertTrue(result.ok)
        self.assertEqual(result.iterations, 1)
        self.assertEqual(result.refutations, 0)
        self.assertTrue(self._passes_all(self.b2.sketch, result.ready, examples))

    # Contradicting examples leave the run without a completion
    def test_unsatisfiable(self):
        examples = [Example.of("10", {}, Int(5)), Example.of("10", {}, Int(6))]
        result = synth_attr_grammar(self.b1.sketch, examples, budget=SynthesisBudget(max_size=3))
        self.assertFalse(result.ok)
        self.assertIsNotNone(result.failed)

    # An example outside the language is reported as such
    def test_bad_example(self):
        with self.assertRaises(ExampleError) as ctx:
            synth_attr_grammar(self.b1.sketch, [Example.of("12", {}, Int(1))])
        self.assertEqual(ctx.exception.text, "12")

    # Frozen bodies are kept and only open holes are searched
    def test_synth_holes_frozen(self):
        b10 = get_benchmark("b10")
        ref = b10.reference()
        frozen = {h: ref[h] for h in ("h2", "h3", "h4", "h5", "h6")}
        examples = [ex for ex in b10.examples() if ex.input in ("x+x", "x^2+4*x+5")]
        out = synth_holes(b10.sketch, examples, frozen, budget=SynthesisBudget(max_size=7))
        self.assertTrue(out.ok)
        self.assertEqual(set(out.bindings), {"h1"})
        self.assertTrue(self._passes_all(b10.sketch, {**frozen, **out.bindings}, examples))

    # A body whose root cannot be inverted is still found above the bank size
    def test_non_invertible_root(self):
        s = load_sketch(WAVE)
        examples = [Example.of(str(n), {}, Real(math.sin(n * (n + 1)))) for n in range(1, 7)]
        out = synth_holes(s, examples)
        self.assertTrue(out.ok)
        self.assertEqual(out.bindings["h1"].op, "sin")
        self.assertEqual(out.bindings["h1"].size, 6)
        self.assertTrue(self._passes_all(s, out.bindings, examples))

    # Without the full-bank pass a miss is a budget miss, not unsat
    def test_goal_directed_only(self):
        s = load_sketch(WAVE)
        examples = [Example.of(str(n), {}, Real(math.sin(n * (n + 1)))) for n in range(1, 7)]
        out = synth_holes(s, examples, exhaustive=False)
        self.assertFalse(out.ok)
        self.assertEqual(out.status, "budget")

    # Running out of bank work while searching full levels reports budget
    def test_bank_work_exhausted(self):
        s = load_sketch(WAVE)
        outputs = [0.123, 4.56, -7.89, 1000.5, 2.5, -0.3]
        examples = [Example.of(str(n), {}, Real(v)) for n, v in enumerate(outputs, start=1)]
        out = synth_holes(s, examples, budget=SynthesisBudget(bank_size=2, max_candidates=1000))
        self.assertFalse(out.ok)
        self.assertEqual(out.status, "budget")

    # Dual holes searched together stay within the size of the known bodies
    def test_dual_search_minimal(self):
        b10 = get_benchmark("b10")
        ref = b10.reference()
        frozen = {h: ref[h] for h in ("h2", "h4", "h5", "h6")}
        examples = [
            Example.of("x+x", {"x": Int(13)}, Dual(26.0, 2.0)),
            Example.of("x*x", {"x": Int(4)}, Dual(16.0, 8.0)),
            Example.of("x*x+x", {"x": Int(3)}, Dual(12.0, 7.0)),
            Example.of("x*x*x", {"x": Int(2)}, Dual(8.0, 12.0)),
            Example.of("2*x", {"x": Int(5)}, Dual(10.0, 2.0)),
        ]
        out = synth_holes(b10.sketch, examples, frozen, budget=SynthesisBudget(max_size=11))
        self.assertTrue(out.ok)
        self.assertEqual(set(out.bindings), {"h1", "h3"})
        self.assertLessEqual(sum(e.size for e in out.bindings.values()), ref["h1"].size + ref["h3"].size)
        self.assertTrue(self._passes_all(b10.sketch, {**frozen, **out.bindings}, examples))

    # Derivation congruence compares production sets
    def test_derivation_congruent(self):
        self.assertTrue(derivation_congruent(self.b1.sketch, "10", "0110"))
        self.assertFalse(derivation_congruent(self.b1.sketch, "10", "11"))

    # Sketchy productions of one derivation
    def test_get_sketchy_prods(self):
        s = get_benchmark("b10").sketch
        self.assertEqual(get_sketchy_prods(s, "x^2+4*x+5"), {2, 5, 7})
        self.assertEqual(get_sketchy_prods(s, "x"), set())

    # The easiest example goes first
    def test_select_example(self):
        b10 = get_benchmark("b10")
        self.assertEqual(select_example(b10.sketch, b10.examples()).input, "2^3")
        self.assertEqual(select_example(self.b1.sketch, self.b1.examples()).input, "0")

    # Productions whose holes are all bound
    def test_ready_prods(self):
        b10 = get_benchmark("b10")
        ref = b10.reference()
        self.assertEqual(ready_prods(b10.sketch, {"h1": ref["h1"], "h2": ref["h2"]}), {2, 3})
        self.assertEqual(ready_prods(b10.sketch, {}), set())

    # Replaying examples on a completed grammar reports each failure
    def test_check_examples(self):
        s = self.b1.sketch
        wrong = complete(s, {"h1": parse_expr("sub(a_1, a_2)", s.hole("h1").signature)})
        results = check_examples(wrong, self.b1.examples())
        failed = [ex.input for ex, _, err in results if err is not None]
        self.assertIn("11", failed)
        self.assertNotIn("1", failed)
        (row,) = [r for r in results if r[0].input == "11"]
        self.assertEqual(row[1], Int(0))
        self.assertEqual(row[2], "expected 2")
