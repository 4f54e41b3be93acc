from synth_files.evaluator import (
    OUTPUT_ATTR,
    TConst,
    THole,
    Trace,
    TraceStep,
    TVar,
    check_trace,
    eval_concrete,
    eval_trace,
    gen_trace,
    schedule,
)
from synth_files.parser import parse_text
from synth_files.sketch_format import load_sketch
from synth_files.values import Dual, Int, value_eq
from synth_files.errors import Circular, EvalError, MissingRule, SketchError
from app.bench.registry import DEFAULT_IDS, get_benchmark
import unittest


CIRCULAR = """
%token T "t"
S -> A          { A.i = A.s ; output A.s ; }
A -> T          { A.s = A.i ; }
"""

PARTIAL = """
%token T "t"
%token U "u"
S -> A          { output A.s ; }
A -> T          { A.s = 1 ; }
A -> U          { }
"""


class TestEvaluator(unittest.TestCase):

    # Setup tests with the differentiation benchmark and its known completion
    def setUp(self):
        self.b10 = get_benchmark("b10")
        self.sketch = self.b10.sketch
        self.grammar = self.b10.completed()
        return super().setUp()

    def _value(self, text, x):
        return eval_concrete(self.grammar, parse_text(self.grammar, text), {"x": Int(x)})

    # The completed grammar computes value and derivative
    def test_forward_differentiation(self):
        cases = {
            ("x^2+4*x+5", 3): Dual(26.0, 10.0),
            ("x+x", 13): Dual(26.0, 2.0),
            ("x*x", 4): Dual(16.0, 8.0),
            ("3-x", 7): Dual(-4.0, -1.0),
            ("2^3", 1): Dual(8.0, 0.0),
            ("x^0", 5): Dual(1.0, 0.0),
        }
        for (text, x), expected in cases.items():
            with self.subTest(text=text):
                self.assertTrue(value_eq(self._value(text, x), expected))

    # sin(x^2) at 3
    def test_chain_rule(self):
        self.assertTrue(value_eq(self._value("sin(x^2)", 3), Dual(0.41, -5.47), 1e-2))

    # An unbound variable names the instance it was read for
    def test_unbound_variable(self):
        with self.assertRaises(EvalError) as ctx:
            eval_concrete(self.grammar, parse_text(self.grammar, "x+1"), {})
        self.assertIn("unbound variable x", str(ctx.exception))
        self.assertIsNotNone(ctx.exception.where)

    # A sketch with open holes cannot be run concretely
    def test_holes_rejected(self):
        with self.assertRaises(SketchError):
            eval_concrete(self.sketch, parse_text(self.sketch, "x"), {"x": Int(1)})

    # The output rule is scheduled last and reads come before writes
    def test_schedule_order(self):
        steps = schedule(self.sketch, parse_text(self.sketch, "x*2"))
        self.assertEqual(steps[-1].instance.attr, OUTPUT_ATTR)
        seen = []
        for step in steps:
            self.assertNotIn(step.instance, seen)
            seen.append(step.instance)
        self.assertEqual(len(steps), 6)

    # Cyclic dependencies are reported
    def test_circular(self):
        s = load_sketch(CIRCULAR)
        with self.assertRaises(Circular) as ctx:
            schedule(s, parse_text(s, "t"))
        self.assertGreaterEqual(len(ctx.exception.cycle), 2)

    # An attribute read on a tree where nothing defines it
    def test_missing_rule(self):
        s = load_sketch(PARTIAL)
        self.assertEqual(schedule(s, parse_text(s, "t"))[-1].instance.attr, OUTPUT_ATTR)
        with self.assertRaises(MissingRule):
            schedule(s, parse_text(s, "u"))

    # Traces keep hole calls symbolic and fold the rest
    def test_gen_trace(self):
        tr = gen_trace(self.sketch, parse_text(self.sketch, "x*2"), {"x": Int(4)})
        self.assertEqual(tr.holes(), frozenset({"h3"}))
        (step,) = tr.steps
        self.assertEqual(step.rhs, THole("h3", (TConst(Dual(4.0, 1.0)), TConst(Dual(2.0, 0.0)))))
        self.assertEqual(tr.out, step.var)
        check_trace(tr)

    # Nested hole calls chain through trace variables
    def test_nested_trace(self):
        tr = gen_trace(self.sketch, parse_text(self.sketch, "sin(x^2)"), {"x": Int(3)})
        self.assertEqual([st.rhs.hole for st in tr.steps], ["h4", "h5"])
        self.assertEqual(tr.steps[1].rhs.args, (TVar(tr.steps[0].var),))
        self.assertIn("h5(x1)", str(tr))

    # Without holes the output is a single constant step
    def test_constant_trace(self):
        s = get_benchmark("b1").sketch
        tr = gen_trace(s, parse_text(s, "1"), {})
        self.assertEqual(tr.holes(), frozenset())
        self.assertEqual(eval_trace(tr, {}), Int(1))

    # Running the trace equals running the completed grammar
    def test_trace_matches_concrete(self):
        for bench_id in DEFAULT_IDS:
            b = get_benchmark(bench_id)
            g = b.completed()
            bodies = b.reference()
            for ex in b.examples():
                with self.subTest(bench=bench_id, example=ex.input):
                    tr = gen_trace(b.sketch, parse_text(b.sketch, ex.input), ex.beta)
                    check_trace(tr)
                    concrete = eval_concrete(g, parse_text(g, ex.input), ex.beta)
                    self.assertTrue(value_eq(eval_trace(tr, bodies), concrete, b.tol))

    # A trace with an unbound hole
    def test_eval_trace_missing_binding(self):
        tr = gen_trace(self.sketch, parse_text(self.sketch, "x+1"), {"x": Int(1)})
        with self.assertRaises(SketchError):
            eval_trace(tr, {})

    # Malformed traces are rejected
    def test_check_trace(self):
        twice = Trace((TraceStep(1, TConst(Int(1))), TraceStep(1, TConst(Int(2)))), 1)
        early = Trace((TraceStep(1, THole("h1", (TVar(2),))), TraceStep(2, TConst(Int(2)))), 1)
        dangling = Trace((TraceStep(1, TConst(Int(1))),), 3)
        for tr in (twice, early, dangling):
            with self.subTest(trace=str(tr)):
                with self.assertRaises(ValueError):
                    check_trace(tr)
