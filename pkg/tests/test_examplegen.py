from synth_files.examplegen import (
    FOUND,
    ZERO_SAMPLES,
    CoverageState,
    StringSampler,
    alternate_bodies,
    derivation_coverage,
    free_variables,
    generate_suite,
    hole_groups,
    join_lexemes,
    label,
    lexeme_pool,
    production_costs,
    sample_context,
    validate,
)
from synth_files.oracles import OracleHandle
from synth_files.parser import parse_text, prod_set
from synth_files.dsl import parse_expr
from synth_files.evaluator import eval_concrete
from synth_files.synthesis import Constraint, Example, ExampleBook
from synth_files.synth_states import SynthesisBudget, ValidationBounds
from synth_files.values import Dual, Int, value_eq
from synth_files.errors import ExampleError
from app.bench.registry import get_benchmark
import random
import unittest


class TestExampleGen(unittest.TestCase):

    # Setup tests with the bit counter and its reference oracle
    def setUp(self):
        self.b1 = get_benchmark("b1")
        self.oracle = OracleHandle.parse("builtin:count-ones")
        self.budget = SynthesisBudget(max_size=5, max_candidates=20000)
        return super().setUp()

    # One string covers the productions of its derivation
    def test_coverage_single(self):
        summary = derivation_coverage(get_benchmark("b10").sketch, ["x^2+4*x+5"])
        self.assertEqual(summary.q1_count, 1)
        self.assertEqual(summary.covered, [1, 2, 4, 5, 6, 7, 10, 11])
        self.assertEqual(summary.total_prods, 11)
        self.assertEqual(summary.fraction_log2, -11.0)

    # Congruent strings count once
    def test_coverage_bits(self):
        summary = derivation_coverage(self.b1.sketch, [ex.input for ex in self.b1.examples()])
        self.assertEqual(summary.q1_count, 4)
        self.assertEqual(summary.covered, [1, 2, 3, 4, 5])
        self.assertEqual(summary.fraction_log2, -3.0)

    # Strings outside the language are named
    def test_coverage_error(self):
        with self.assertRaises(ExampleError) as ctx:
            derivation_coverage(self.b1.sketch, ["10", "12"])
        self.assertEqual(ctx.exception.text, "12")

    # Coverage state reports new production sets
    def test_coverage_state(self):
        cov = CoverageState()
        self.assertTrue(cov.add(frozenset({1, 3, 4})))
        self.assertFalse(cov.add(frozenset({1, 3, 4})))
        self.assertTrue(cov.add(frozenset({1, 3, 5})))
        self.assertEqual(cov.covered, {1, 3, 4, 5})
        self.assertEqual(cov.hits[1], 3)

    # Shallowest derivation height per production
    def test_production_costs(self):
        self.assertEqual(production_costs(self.b1.sketch), {1: 3, 2: 3, 3: 2, 4: 1, 5: 1})

    # Lexeme pools only hold lexemes that tokenize back to the terminal
    def test_lexeme_pool(self):
        s = get_benchmark("b10").sketch
        self.assertEqual(lexeme_pool(s, s.symbol("var")), ("x",))
        self.assertEqual(lexeme_pool(s, s.symbol("PLUS")), ("+",))
        self.assertEqual(lexeme_pool(s, s.symbol("num")), tuple("0123456789"))
        ids = lexeme_pool(get_benchmark("b8").sketch, get_benchmark("b8").sketch.symbol("id"))
        self.assertEqual(ids[:3], ("a", "b", "c"))

    # Word characters are separated, punctuation is not
    def test_join_lexemes(self):
        self.assertEqual(join_lexemes(["int", "a", ",", "b", ";"]), "int a,b;")
        self.assertEqual(join_lexemes(["sin", "(", "x", ")"]), "sin(x)")
        self.assertEqual(join_lexemes(["1", "0"]), "1 0")

    # Contexts are seeded integers in [-5, 5]
    def test_sample_context(self):
        beta = sample_context(["y", "x", "x"], 3)
        self.assertEqual(set(beta), {"x", "y"})
        self.assertEqual(beta, sample_context(["x", "y"], 3))
        for _ in range(20):
            for v in sample_context(["x"], random.Random(_)).values():
                self.assertTrue(-5 <= v.i <= 5)

    # Integer contexts are lifted by the rules that read them into duals
    def test_sampled_context_lifted(self):
        g = get_benchmark("b10").completed()
        beta = sample_context(["x"], 5)
        self.assertIsInstance(beta["x"], Int)
        x = float(beta["x"].i)
        value = eval_concrete(g, parse_text(g, "x*x+x"), beta)
        self.assertTrue(value_eq(value, Dual(x * x + x, 2 * x + 1), 1e-9))

    # Identifiers of a tree in first occurrence order
    def test_free_variables(self):
        s = get_benchmark("b10").sketch
        self.assertEqual(free_variables(s, parse_text(s, "y*x+y")), ["y", "x"])
        self.assertEqual(free_variables(s, parse_text(s, "2^3")), [])

    # Sampled strings parse back to their tree
    def test_sampler(self):
        s = get_benchmark("b10").sketch
        sampler = StringSampler(s, random.Random(5), max_depth=6)
        drawn = [d for d in (sampler.draw() for _ in range(20)) if d is not None]
        self.assertTrue(drawn)
        for text, tree in drawn:
            self.assertEqual(parse_text(s, text), tree)
        with self.assertRaises(ValueError):
            StringSampler(s, random.Random(0), max_depth=0)

    # Domain errors of the oracle lead to a new context
    def test_label_resamples(self):
        s = get_benchmark("b10").sketch
        oracle = OracleHandle.parse("builtin:forward-diff")
        ex = label(s, "x^0", parse_text(s, "x^0"), oracle, random.Random(0))
        self.assertNotEqual(ex.beta["x"], Int(0))
        self.assertTrue(value_eq(ex.output, Dual(1.0, 0.0)))

    # Generation stops at the first new production set
    def test_generate_one(self):
        suite = generate_suite(self.b1.sketch, self.oracle, 1, seed=2)
        self.assertTrue(suite.complete)
        (ex,) = suite.examples
        self.assertEqual(ex.output, Int(ex.input.count("1")))
        self.assertEqual(len(suite.coverage.q1), 1)

    # Every production set of the bit grammar is reached and the suite is sorted
    def test_generate_all_sets(self):
        suite = generate_suite(self.b1.sketch, self.oracle, 4, seed=1)
        self.assertTrue(suite.complete)
        self.assertEqual(len(suite.examples), 4)
        sets = [prod_set(parse_text(self.b1.sketch, ex.input)) for ex in suite.examples]
        self.assertEqual(len(set(sets)), 4)
        self.assertEqual([len(p) for p in sets], sorted(len(p) for p in sets))
        again = generate_suite(self.b1.sketch, self.oracle, 4, seed=1)
        self.assertEqual(again.examples, suite.examples)

    # An unreachable target runs out of attempts
    def test_generate_incomplete(self):
        suite = generate_suite(self.b1.sketch, self.oracle, 5, max_attempts=50, seed=0)
        self.assertFalse(suite.complete)
        self.assertEqual(suite.attempts, 50)
        with self.assertRaises(ValueError):
            generate_suite(self.b1.sketch, self.oracle, 0)

    # Coverage handed in counts toward the target
    def test_generate_with_coverage(self):
        cov = CoverageState()
        for ex in self.b1.examples():
            cov.add(ExampleBook(self.b1.sketch).prods(ex.input))
        suite = generate_suite(self.b1.sketch, self.oracle, 4, cov=cov)
        self.assertEqual(suite.examples, [])
        self.assertEqual(suite.attempts, 0)

    # The right completion is never refuted
    def test_validate_unique(self):
        bounds = ValidationBounds(strings=6, contexts=1, max_alternates=2, max_depth=6)
        s = self.b1.sketch
        out = validate(s, self.b1.reference(), self.b1.examples(), s.dsl, self.oracle, bounds, seed=0, budget=self.budget)
        self.assertNotEqual(out.status, FOUND)
        self.assertTrue(out.unique)
        for ex in out.confirmed:
            self.assertEqual(ex.output, Int(ex.input.count("1")))

    # A completion fitted to one example is refuted by a distinguishing input
    def test_validate_found(self):
        s = self.b1.sketch
        ready = {"h1": parse_expr("a_1", s.hole("h1").signature)}
        examples = [Example.of("10", {}, Int(1))]
        bounds = ValidationBounds(strings=40, contexts=1, max_alternates=4, max_depth=8)
        out = validate(s, ready, examples, s.dsl, self.oracle, bounds, seed=0, budget=self.budget)
        self.assertEqual(out.status, FOUND)
        self.assertEqual(out.holes, ("h1",))
        self.assertEqual(set(out.alternate), {"h1"})
        self.assertEqual(out.example.output, Int(out.example.input.count("1")))
        self.assertFalse(ExampleBook(s).passes(out.example, ready, 1e-6))

    # Pairs of holes are grouped only when one example reaches both
    def test_hole_groups(self):
        b10 = get_benchmark("b10")
        book = ExampleBook(b10.sketch)
        examples = [Example.of("x*x+x", {"x": Int(3)}, Dual(12.0, 7.0)), Example.of("sin(x)", {"x": Int(1)}, Dual(0.84, 0.54))]
        singles = [(h,) for h in sorted(b10.reference())]
        self.assertEqual(hole_groups(book, examples, b10.reference(), True), singles + [("h1", "h3")])
        self.assertEqual(hole_groups(book, examples, b10.reference(), False), singles)
        self.assertEqual(hole_groups(book, examples, {"h1": b10.reference()["h1"]}, True), [("h1",)])

    # A pair alternate rebinds both holes and still passes the examples
    def test_pair_alternates(self):
        b10 = get_benchmark("b10")
        s = b10.sketch
        ref = b10.reference()
        book = ExampleBook(s)
        examples = [Example.of("x+x", {"x": Int(13)}, Dual(26.0, 2.0)), Example.of("x*x", {"x": Int(4)}, Dual(16.0, 8.0))]
        constraints = [Constraint(book.trace(ex), ex.output, 1e-6, ex) for ex in examples]
        alts = alternate_bodies(("h1", "h3"), ref, constraints, s, s.dsl, SynthesisBudget(max_size=9), 2)
        self.assertTrue(alts)
        for alt in alts:
            self.assertEqual(set(alt), {"h1", "h3"})
            self.assertNotEqual(alt["h1"], ref["h1"])
            self.assertNotEqual(alt["h3"], ref["h3"])
            for ex in examples:
                self.assertTrue(book.passes(ex, {**ref, **alt}, 1e-6))

    # No sampled inputs means no claim
    def test_validate_zero_samples(self):
        bounds = ValidationBounds(strings=0)
        out = validate(self.b1.sketch, self.b1.reference(), self.b1.examples(), self.b1.sketch.dsl, self.oracle, bounds)
        self.assertEqual(out.status, ZERO_SAMPLES)
        self.assertEqual(out.tried, 0)
