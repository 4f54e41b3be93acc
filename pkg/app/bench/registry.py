"""Built-in benchmarks: sketch files, reference oracles and canonical suites.

The sketch of each benchmark ships as package data (`app/bench/<id>.ag`) and is
read with importlib.resources. The reference bodies below are a known
completion of each sketch; they are used by tests and by `bench export`, never
by the synthesizer.
"""

# Import Libraries
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from typing import Callable, Dict, List, Mapping, Tuple

from app.bench.reference import ORACLES
from synth_files.dsl import DslExpr, parse_expr
from synth_files.grammar import Sketch, complete
from synth_files.sketch_format import load_sketch
from synth_files.synthesis import Example
from synth_files.values import Int, Value

logger = logging.getLogger(__name__)

Sample = Tuple[str, Tuple[Tuple[str, int], ...]]

DEFAULT_IDS = ("b1", "b2", "b3", "b4", "b5", "b6", "b7", "b8", "b10")


def _s(text: str, **context: int) -> Sample:
    return text, tuple(sorted(context.items()))


@dataclass(frozen=True)
class Benchmark:
    """One benchmark.

    Attributes:
        id (str): Benchmark id, e.g. "b10".
        title (str): Short description.
        oracle_name (str): Key into the builtin oracle table.
        samples (tuple): Canonical (input, context) pairs.
        reference_bodies (tuple): (hole, body text) pairs of a known completion.
        tol (float): Comparison tolerance of the benchmark.
    """

    id: str
    title: str
    oracle_name: str
    samples: Tuple[Sample, ...]
    reference_bodies: Tuple[Tuple[str, str], ...]
    tol: float = 1e-6
    extra: bool = field(default=False, compare=False)

    @property
    def filename(self) -> str:
        return f"{self.id}.ag"

    @cached_property
    def text(self) -> str:
        with resources.open_text("app.bench", self.filename, encoding="utf-8") as f:
            return f.read()

    @cached_property
    def sketch(self) -> Sketch:
        return load_sketch(self.text)

    @property
    def prods(self) -> int:
        return len(self.sketch.productions)

    @property
    def holes(self) -> int:
        return len(self.sketch.holes)

    @property
    def oracle(self) -> Callable[[str, Mapping[str, Value]], Value]:
        return ORACLES[self.oracle_name]

    def examples(self) -> List[Example]:
        """Canonical examples, outputs computed by the reference oracle."""
        out = []
        for text, context in self.samples:
            beta = {k: Int(v) for k, v in context}
            out.append(Example.of(text, beta, self.oracle(text, beta)))
        return out

    def reference(self) -> Dict[str, DslExpr]:
        """The known completion, parsed against each hole's signature."""
        return {h: parse_expr(body, self.sketch.hole(h).signature) for h, body in self.reference_bodies}

    def completed(self) -> Sketch:
        return complete(self.sketch, self.reference())


_DUAL_ADD = "Dual(add(a_1, a_2), add(d_1, d_2))"
_DUAL_SUB = "Dual(sub(a_1, a_2), sub(d_1, d_2))"
_DUAL_MUL = "Dual(mul(a_1, a_2), add(mul(a_1, d_2), mul(d_1, a_2)))"
_DUAL_POW = "Dual(pow(a_1, a_2), mul(mul(real(a_2), d_1), pow(a_1, sub(a_2, 1))))"
_DUAL_SIN = "Dual(sin(a_1), mul(d_1, cos(a_1)))"
_DUAL_COS = "Dual(cos(a_1), neg(mul(d_1, sin(a_1))))"

_INT_FOUR = (("h1", "add(a_1, a_2)"), ("h2", "sub(a_1, a_2)"), ("h3", "mul(a_1, a_2)"), ("h4", "div(a_1, a_2)"))

_BITS = (_s("0"), _s("1"), _s("10"), _s("11"), _s("101"), _s("0110"), _s("0111"))

_DIFF = (
    _s("x+x", x=13),
    _s("3-x", x=7),
    _s("x*x", x=4),
    _s("x^3", x=2),
    _s("x^2+4*x+5", x=3),
    _s("sin(x^2)", x=3),
    _s("cos(x^2)", x=2),
    _s("x*cos(x)", x=4),
    _s("sin(x)^2", x=1),
    _s("2^3", x=1),
)

_BENCHMARKS = (
    Benchmark(
        "b1",
        "count ones",
        "count-ones",
        _BITS,
        (("h1", "add(a_1, a_2)"),),
    ),
    Benchmark(
        "b2",
        "binary to integer",
        "bin2int",
        _BITS,
        (("h1", "add(mul(a_1, 2), a_2)"),),
    ),
    Benchmark(
        "b3",
        "prefix evaluator",
        "prefix",
        (
            _s("+ 3 4"),
            _s("- 9 4"),
            _s("* 2 3"),
            _s("/ 7 2"),
            _s("/ 9 2"),
            _s("+ x 1", x=3),
            _s("* x y", x=2, y=5),
            _s("- + 1 2 3"),
        ),
        _INT_FOUR,
    ),
    Benchmark(
        "b4",
        "postfix evaluator",
        "postfix",
        (
            _s("3 4 +"),
            _s("9 4 -"),
            _s("2 3 *"),
            _s("7 2 /"),
            _s("9 2 /"),
            _s("x 1 +", x=3),
            _s("2 3 4 * +"),
        ),
        _INT_FOUR,
    ),
    Benchmark(
        "b5",
        "arithmetic calculator",
        "calc",
        (
            _s("3 + 4"),
            _s("9 - 4"),
            _s("2 * 3"),
            _s("7 / 2"),
            _s("9 / 2"),
            _s("5 * 2 + 8"),
            _s("8 - 2 * 3"),
        ),
        _INT_FOUR,
    ),
    Benchmark(
        "b6",
        "currency calculator",
        "currency",
        (
            _s("USD 3 + USD 4"),
            _s("USD 9 - USD 4"),
            _s("USD 3 * 4"),
            _s("USD 9 / 2"),
            _s("EUR 5"),
            _s("USD 3 + EUR 8"),
            _s("( USD 2 + USD 3 ) * 2"),
        ),
        (("h1", "add(a_1, a_2)"), ("h2", "sub(a_1, a_2)"), ("h3", "mul(a_1, a_2)"), ("h4", "div(a_1, a_2)")),
        tol=1e-2,
    ),
    Benchmark(
        "b7",
        "if-else calculator",
        "ifelse",
        (
            _s("3+4;"),
            _s("5-2;"),
            _s("2*3;"),
            _s("if(2 == 2) then 1; else 0;"),
            _s("if(1 == 2) then 5; else 6;"),
            _s("if(3 == 2) then 7; else 8;"),
            _s("if(3+4 == 3) then 44; else 73;"),
        ),
        (("h1", "add(a_1, a_2)"), ("h2", "sub(a_1, a_2)"), ("h3", "mul(a_1, a_2)"), ("h4", "eq(a_1, a_2)")),
    ),
    Benchmark(
        "b8",
        "activation record layout",
        "layout",
        (
            _s("int a;"),
            _s("char c;"),
            _s("int a, b;"),
            _s("char a, b, c;"),
            _s("int a[3];"),
            _s("char s[5], t;"),
            _s("int a; char b;"),
            _s("int x, y[2];"),
        ),
        (("h1", "add(a_1, a_2)"), ("h2", "add(a_1, mul(a_2, a_3))"), ("h3", "a_1")),
    ),
    Benchmark(
        "b10",
        "forward differentiation",
        "forward-diff",
        _DIFF,
        (("h1", _DUAL_ADD), ("h2", _DUAL_SUB), ("h3", _DUAL_MUL), ("h4", _DUAL_POW), ("h5", _DUAL_SIN), ("h6", _DUAL_COS)),
    ),
    Benchmark(
        "b10x",
        "forward differentiation, extended",
        "forward-diff",
        _DIFF
        + (
            _s("x/2", x=3),
            _s("exp(x)", x=1),
            _s("log(x)", x=2),
            _s("-x", x=3),
            _s("+x", x=2),
            _s("sq(x)", x=3),
            _s("3x", x=2),
            _s("pi*x", x=1),
            _s("(x+1)*x", x=2),
        ),
        (
            ("h1", _DUAL_ADD),
            ("h2", _DUAL_SUB),
            ("h3", _DUAL_MUL),
            ("h4", _DUAL_POW),
            ("h5", _DUAL_SIN),
            ("h6", _DUAL_COS),
            ("h7", "Dual(div(a_1, a_2), div(sub(mul(d_1, a_2), mul(a_1, d_2)), mul(a_2, a_2)))"),
            ("h8", "Dual(exp(a_1), mul(d_1, exp(a_1)))"),
            ("h9", "Dual(log(a_1), div(d_1, a_1))"),
            ("h10", "Dual(neg(a_1), neg(d_1))"),
            ("h11", "Dual(mul(a_1, a_1), mul(mul(2, a_1), d_1))"),
            ("h12", "Dual(a_1, d_1)"),
        ),
        extra=True,
    ),
)


@lru_cache(maxsize=1)
def registry() -> Dict[str, Benchmark]:
    """All built-in benchmarks by id."""
    return {b.id: b for b in _BENCHMARKS}


def get_benchmark(bench_id: str) -> Benchmark:
    """Look a benchmark up by id.

    Raises:
        ValueError: If the id is unknown.
    """
    try:
        return registry()[bench_id]
    except KeyError:
        raise ValueError(f"unknown benchmark {bench_id!r}; known: {', '.join(registry())}") from None
