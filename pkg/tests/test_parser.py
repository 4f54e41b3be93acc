from synth_files.parser import Leaf, leaves, leftmost_derivation, nullable_symbols, parse_text, prod_set, tokenize
from synth_files.sketch_format import load_sketch
from synth_files.errors import Ambiguous, LexError, NoParse
from app.bench.registry import get_benchmark
import unittest


AMBIGUOUS = """
%token P "+"
%token A "a"
S -> E          { output E.v ; }
E -> E P E      { E0.v = add(E1.v, E2.v) ; }
E -> A          { E.v = 1 ; }
"""

EMPTY = """
%token A "a"
S -> L          { output L.n ; }
L -> L A        { L0.n = add(L1.n, 1) ; }
L ->            { L.n = 0 ; }
"""


class TestParser(unittest.TestCase):

    # Setup tests with the differentiation sketch
    def setUp(self):
        self.sketch = get_benchmark("b10").sketch
        return super().setUp()

    # Longest match wins and ties go to the terminal declared first
    def test_maximal_munch(self):
        tokens = tokenize(self.sketch, "sin(x) + sinx")
        self.assertEqual(
            [(t.symbol, t.lexeme) for t in tokens],
            [("SIN", "sin"), ("LP", "("), ("var", "x"), ("RP", ")"), ("PLUS", "+"), ("var", "sinx")],
        )
        self.assertEqual([t.position for t in tokens], [0, 3, 4, 5, 7, 9])

    # Numbers take every digit
    def test_numbers(self):
        tokens = tokenize(self.sketch, "x^12")
        self.assertEqual([t.lexeme for t in tokens], ["x", "^", "12"])

    # Unknown characters raise with their position
    def test_lex_error(self):
        with self.assertRaises(LexError) as ctx:
            tokenize(self.sketch, "x # 1")
        self.assertEqual(ctx.exception.position, 2)

    # A truncated input fails at its end with the terminals expected there
    def test_no_parse_at_end(self):
        with self.assertRaises(NoParse) as ctx:
            parse_text(self.sketch, "x+")
        self.assertEqual(ctx.exception.position, 2)
        self.assertIn("var", ctx.exception.expected)
        self.assertIn("num", ctx.exception.expected)

    # A stray token fails at that token
    def test_no_parse_inside(self):
        with self.assertRaises(NoParse) as ctx:
            parse_text(self.sketch, "x)")
        self.assertEqual(ctx.exception.position, 1)

    # Two trees for one input are rejected
    def test_ambiguous(self):
        s = load_sketch(AMBIGUOUS)
        parse_text(s, "a+a")
        with self.assertRaises(Ambiguous):
            parse_text(s, "a+a+a")

    # The production set of a tree
    def test_prod_set(self):
        t = parse_text(self.sketch, "x^2+4*x+5")
        self.assertEqual(prod_set(t), frozenset({1, 2, 4, 5, 6, 7, 10, 11}))

    # Productions of the leftmost derivation come out in preorder
    def test_leftmost_derivation(self):
        t = parse_text(self.sketch, "x+1")
        self.assertEqual(leftmost_derivation(t), [1, 2, 4, 6, 11, 6, 10])
        self.assertEqual(leftmost_derivation(Leaf(leaves(t)[0])), [])

    # Leaves give back the tokens in order
    def test_leaves(self):
        t = parse_text(self.sketch, "sin(x)")
        self.assertEqual([tok.symbol for tok in leaves(t)], ["SIN", "LP", "var", "RP"])

    # Empty productions and left recursion parse
    def test_empty_rule(self):
        s = load_sketch(EMPTY)
        self.assertEqual(nullable_symbols(s), {"S", "L"})
        self.assertEqual(leftmost_derivation(parse_text(s, "aa")), [1, 2, 2, 3])
        self.assertEqual(leftmost_derivation(parse_text(s, "")), [1, 3])
        self.assertEqual(nullable_symbols(self.sketch), set())
