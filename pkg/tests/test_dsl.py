from synth_files.dsl import (
    ExprBank,
    app,
    check_body,
    compile_expr,
    enumerate_exprs,
    eval_body,
    eval_expr,
    param,
    parse_expr,
    sample_envs,
    show_expr,
)
from synth_files.values import Bool, Dual, Int, Real
from synth_files.errors import BudgetExhausted, EvalError, SketchError
from app.bench.registry import get_benchmark
import itertools
import operator
import unittest


def _brute_vectors(ops, names, envs, max_size):
    """Value vectors of every syntactic body up to max_size, without dedup."""
    levels = {1: [tuple(env[n] for env in envs) for n in names] + [(lit,) * len(envs) for lit in (-1, 0, 1, 2)]}
    for size in range(2, max_size + 1):
        level = []
        for s1 in range(1, size - 1):
            for v1, v2 in itertools.product(levels[s1], levels[size - 1 - s1]):
                level.extend(tuple(fn(x, y) for x, y in zip(v1, v2)) for fn in ops)
        levels[size] = level
    return set(itertools.chain.from_iterable(levels.values()))


class TestDsl(unittest.TestCase):

    # Setup tests with the bit counter and differentiation holes
    def setUp(self):
        self.b1 = get_benchmark("b1").sketch
        self.b10 = get_benchmark("b10").sketch
        self.int_sig = self.b1.hole("h1").signature
        self.dual_sig = self.b10.hole("h3").signature
        return super().setUp()

    # Printing a parsed body gives back the text
    def test_parse_show(self):
        for text, sig in [
            ("Dual(add(a_1, a_2), add(d_1, d_2))", self.dual_sig),
            ("add(mul(a_1, 2), a_2)", self.int_sig),
            ("mul(a_1, 1.5)", self.dual_sig),
            ("a_2", self.int_sig),
        ]:
            with self.subTest(text=text):
                self.assertEqual(show_expr(parse_expr(text, sig)), text)

    # Sizes count nodes and kinds follow the builtins
    def test_size_and_kind(self):
        e = parse_expr("Dual(add(a_1, a_2), add(d_1, d_2))", self.dual_sig)
        self.assertEqual(e.size, 7)
        self.assertEqual(e.kind, "dual")
        self.assertEqual(parse_expr("add(a_1, a_2)", self.int_sig).kind, "int")
        self.assertEqual(e.params(), frozenset({"a_1", "a_2", "d_1", "d_2"}))

    # Syntax errors, unknown names and ill-typed applications
    def test_parse_errors(self):
        for text in ["add(a_1", "add(a_1, q)", "sin(eq(a_1, a_2))", "frob(a_1)"]:
            with self.subTest(text=text):
                with self.assertRaises(SketchError):
                    parse_expr(text, self.int_sig)

    # Bodies run on destructured argument values
    def test_eval_body(self):
        mul = parse_expr("Dual(mul(a_1, a_2), add(mul(a_1, d_2), mul(d_1, a_2)))", self.dual_sig)
        self.assertEqual(eval_body(mul, self.dual_sig, [Dual(4.0, 1.0), Dual(4.0, 1.0)]), Dual(16.0, 8.0))
        add = parse_expr("add(a_1, a_2)", self.int_sig)
        self.assertEqual(eval_body(add, self.int_sig, [Int(2), Int(3)]), Int(5))

    # Numbers passed for a dual parameter have a zero derivative
    def test_eval_body_promotes(self):
        body = parse_expr("Dual(a_1, d_1)", self.b10.hole("h5").signature)
        self.assertEqual(eval_body(body, self.b10.hole("h5").signature, [Int(3)]), Dual(3.0, 0.0))

    # Argument count and kinds are checked
    def test_eval_body_errors(self):
        add = parse_expr("add(a_1, a_2)", self.int_sig)
        with self.assertRaises(EvalError):
            eval_body(add, self.int_sig, [Int(1)])
        with self.assertRaises(EvalError):
            eval_body(add, self.int_sig, [Int(1), Real(2.0)])

    # eval_expr wraps results by kind
    def test_eval_expr(self):
        self.assertEqual(eval_expr(parse_expr("add(a_1, 1)", self.int_sig), {"a_1": Int(2)}), Int(3))
        real_sig = get_benchmark("b6").sketch.hole("h3").signature
        self.assertEqual(eval_expr(parse_expr("mul(a_1, a_2)", real_sig), {"a_1": Real(1.5), "a_2": Int(2)}), Real(3.0))
        self.assertEqual(eval_expr(app("lt", param("a_1", "int"), param("a_2", "int")), {"a_1": Int(1), "a_2": Int(2)}), Bool(True))

    # Bodies must use hole parameters and return the hole's kind
    def test_check_body(self):
        check_body(parse_expr("add(a_1, a_2)", self.int_sig), self.int_sig)
        with self.assertRaises(SketchError):
            check_body(param("d_1", "real"), self.int_sig)
        with self.assertRaises(SketchError):
            check_body(app("eq", param("a_1", "int"), param("a_2", "int")), self.int_sig)

    # Sample environments are seeded and bounded
    def test_sample_envs(self):
        envs = sample_envs(self.dual_sig, 8, 3)
        self.assertEqual(envs, sample_envs(self.dual_sig, 8, 3))
        self.assertEqual(len(envs), 8)
        for env in envs:
            self.assertEqual(set(env), {"a_1", "d_1", "a_2", "d_2"})
            for v in env.values():
                self.assertTrue(0.25 <= abs(v) <= 3.0)
        for env in sample_envs(self.int_sig, 8, 3):
            self.assertTrue(all(-4 <= v <= 4 for v in env.values()))

    # Parameters come first, then literals, then larger applications
    def test_enumeration_order(self):
        envs = sample_envs(self.int_sig, 8, 0)
        bodies = list(enumerate_exprs(self.b1.dsl, self.int_sig, 3, envs))
        shown = [show_expr(e) for e in bodies]
        self.assertEqual(shown[:2], ["a_1", "a_2"])
        self.assertEqual([e.size for e in bodies], sorted(e.size for e in bodies))
        self.assertIn("add(a_1, a_2)", shown)
        self.assertNotIn("add(a_2, a_1)", shown)
        self.assertEqual(len(shown), len(set(shown)))

    # One body per value vector, and every vector a brute-force walk reaches
    def test_enumeration_complete(self):
        envs = sample_envs(self.int_sig, 6, 1)
        cases = [(self.b1.dsl, [operator.add]), (get_benchmark("b2").sketch.dsl, [operator.add, operator.mul])]
        for dsl, ops in cases:
            with self.subTest(ops=[fn.__name__ for fn in ops]):
                bodies = list(enumerate_exprs(dsl, self.int_sig, 5, envs))
                vectors = [tuple(compile_expr(e)(env) for env in envs) for e in bodies]
                self.assertEqual(len(vectors), len(set(vectors)))
                self.assertEqual(set(vectors), _brute_vectors(ops, ["a_1", "a_2"], envs, 5))

    # Dual bodies pair a value and a derivative
    def test_dual_enumeration(self):
        envs = sample_envs(self.dual_sig, 8, 0)
        first = next(enumerate_exprs(self.b10.dsl, self.dual_sig, 5, envs, "C"))
        self.assertEqual(show_expr(first), "Dual(a_1, a_1)")
        self.assertEqual(first.kind, "dual")

    # The bank stops when its work limit is passed
    def test_bank_budget(self):
        envs = sample_envs(self.int_sig, 4, 0)
        bank = ExprBank(self.b1.dsl, self.int_sig, envs, max_work=5)
        self.assertTrue(bank.level("I", 1))
        with self.assertRaises(BudgetExhausted):
            bank.level("I", 3)

    # Size bounds below one are rejected
    def test_bad_size(self):
        with self.assertRaises(ValueError):
            list(enumerate_exprs(self.b1.dsl, self.int_sig, 0, sample_envs(self.int_sig, 2, 0)))
