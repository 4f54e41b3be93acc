"""Reference oracles of the built-in benchmarks.

Each oracle maps an input string and a context to the intended value. They
share no code with the attribute evaluator: the calculators are small
recursive-descent or stack evaluators and forward differentiation runs on its
own dual-number class.
"""

# Import Libraries
import math
import re
from functools import reduce
from typing import Callable, Dict, List, Mapping

from synth_files.errors import OracleDomainError, OracleError
from synth_files.values import Dual, Int, Real, Tag, Value

EUR_TO_USD = 1.16

_TOKEN = re.compile(r"\s*(\d+|[A-Za-z_]+|==|\S)")


def _tokens(text: str) -> List[str]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise OracleError(f"cannot tokenize {text!r} at {pos}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Cursor:
    """Token stream with one token of lookahead."""

    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expected: str = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise OracleError(f"{self.text!r}: expected {expected or 'a token'} at token {self.i}, got {tok!r}")
        self.i += 1
        return tok

    def number(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise OracleError(f"{self.text!r}: expected a number, got {tok!r}")
        return int(tok)

    def end(self) -> None:
        if self.peek() is not None:
            raise OracleError(f"{self.text!r}: trailing input at token {self.i}")


def _lookup(beta: Mapping[str, Value], name: str):
    if name not in beta:
        raise OracleError(f"unbound variable {name}")
    v = beta[name]
    if isinstance(v, Int):
        return v.i
    if isinstance(v, Real):
        return v.r
    raise OracleError(f"variable {name} must be a number")


def _tdiv(a: int, b: int) -> int:
    if b == 0:
        raise OracleDomainError("division by zero")
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


_INT_OPS: Dict[str, Callable[[int, int], int]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _tdiv,
}


# Bit strings


def _bits(text: str) -> List[int]:
    bits = [c for c in text if not c.isspace()]
    if any(c not in "01" for c in bits):
        raise OracleError(f"{text!r} is not a bit string")
    return [int(c) for c in bits]


def count_ones_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """Number of 1 bits."""
    return Int(reduce(lambda acc, b: acc + b, _bits(text), 0))


def bin2int_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """Unsigned value of a bit string, most significant bit first."""
    return Int(reduce(lambda acc, b: 2 * acc + b, _bits(text), 0))


# Prefix and postfix


def _operand(tok: str, beta) -> int:
    if tok.isdigit():
        return int(tok)
    if tok.isalpha():
        return _lookup(beta, tok)
    raise OracleError(f"unexpected token {tok!r}")


def prefix_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """Evaluate a prefix expression with a stack, scanning right to left."""
    stack: List[int] = []
    for tok in reversed(_tokens(text)):
        if tok in _INT_OPS:
            if len(stack) < 2:
                raise OracleError(f"{text!r}: operator {tok} lacks operands")
            a, b = stack.pop(), stack.pop()
            stack.append(_INT_OPS[tok](a, b))
        else:
            stack.append(_operand(tok, beta))
    if len(stack) != 1:
        raise OracleError(f"{text!r} is not a single prefix expression")
    return Int(stack[0])


def postfix_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """Evaluate a postfix expression with a stack, scanning left to right."""
    stack: List[int] = []
    for tok in _tokens(text):
        if tok in _INT_OPS:
            if len(stack) < 2:
                raise OracleError(f"{text!r}: operator {tok} lacks operands")
            b, a = stack.pop(), stack.pop()
            stack.append(_INT_OPS[tok](a, b))
        else:
            stack.append(_operand(tok, beta))
    if len(stack) != 1:
        raise OracleError(f"{text!r} is not a single postfix expression")
    return Int(stack[0])


# Infix calculators


def _int_expr(c: _Cursor) -> int:
    value = _int_term(c)
    while c.peek() in ("+", "-"):
        op = c.take()
        value = _INT_OPS[op](value, _int_term(c))
    return value


def _int_term(c: _Cursor) -> int:
    value = _int_factor(c)
    while c.peek() in ("*", "/"):
        op = c.take()
        value = _INT_OPS[op](value, _int_factor(c))
    return value


def _int_factor(c: _Cursor) -> int:
    if c.peek() == "(":
        c.take("(")
        value = _int_expr(c)
        c.take(")")
        return value
    return c.number()


def calc_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """Integer calculator with + - * / and the usual precedence."""
    c = _Cursor(text)
    value = _int_expr(c)
    c.end()
    return Int(value)


def ifelse_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """Calculator statement `E;` or `if (E == E) then E; else E;`."""
    c = _Cursor(text)
    if c.peek() == "if":
        c.take("if")
        c.take("(")
        left = _int_expr(c)
        c.take("==")
        right = _int_expr(c)
        c.take(")")
        c.take("then")
        yes = _int_expr(c)
        c.take(";")
        c.take("else")
        no = _int_expr(c)
        c.take(";")
        c.end()
        return Int(yes if left == right else no)
    value = _int_expr(c)
    c.take(";")
    c.end()
    return Int(value)


# Currency


def _money(c: _Cursor) -> tuple:
    tok = c.peek()
    if tok == "(":
        c.take("(")
        value = _money_expr(c)
        c.take(")")
        return value
    label = c.take()
    if label not in ("USD", "EUR"):
        raise OracleError(f"{c.text!r}: unknown currency {label!r}")
    return label, float(c.number())


def _in_usd(m: tuple) -> float:
    label, amount = m
    return amount * EUR_TO_USD if label == "EUR" else amount


def _money_term(c: _Cursor) -> tuple:
    label, amount = _money(c)
    while c.peek() in ("*", "/"):
        op = c.take()
        k = c.number()
        if op == "*":
            amount = amount * k
        elif k == 0:
            raise OracleDomainError("division by zero")
        else:
            amount = amount / k
    return label, amount


def _money_expr(c: _Cursor) -> tuple:
    value = _money_term(c)
    while c.peek() in ("+", "-"):
        op = c.take()
        rhs = _money_term(c)
        if value[0] == rhs[0]:
            amount = value[1] + rhs[1] if op == "+" else value[1] - rhs[1]
            value = (value[0], amount)
        else:
            amount = _in_usd(value) + _in_usd(rhs) if op == "+" else _in_usd(value) - _in_usd(rhs)
            value = ("USD", amount)
    return value


def currency_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """USD/EUR calculator reporting in USD at EUR 1 = USD 1.16."""
    c = _Cursor(text)
    value = _money_expr(c)
    c.end()
    return Tag("USD", _in_usd(value))


# Activation record layout

WIDTHS = {"int": 4, "char": 1}


def layout_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """Size of the activation record laid out by a declaration list."""
    c = _Cursor(text)
    size = 0
    if c.peek() is None:
        raise OracleError("empty declaration list")
    while c.peek() is not None:
        kind = c.take()
        if kind not in WIDTHS:
            raise OracleError(f"{text!r}: unknown type {kind!r}")
        while True:
            name = c.take()
            if not name.isalpha():
                raise OracleError(f"{text!r}: bad variable name {name!r}")
            count = 1
            if c.peek() == "[":
                c.take("[")
                count = c.number()
                c.take("]")
            size += WIDTHS[kind] * count
            if c.peek() != ",":
                break
            c.take(",")
        c.take(";")
    return Int(size)


# Forward differentiation


class DualNumber:
    """re + du·ε with ε² = 0."""

    __slots__ = ("re", "du")

    def __init__(self, re: float, du: float = 0.0):
        self.re = float(re)
        self.du = float(du)

    def __add__(self, other: "DualNumber") -> "DualNumber":
        return DualNumber(self.re + other.re, self.du + other.du)

    def __sub__(self, other: "DualNumber") -> "DualNumber":
        return DualNumber(self.re - other.re, self.du - other.du)

    def __mul__(self, other: "DualNumber") -> "DualNumber":
        return DualNumber(self.re * other.re, self.du * other.re + self.re * other.du)

    def __truediv__(self, other: "DualNumber") -> "DualNumber":
        if other.re == 0:
            raise OracleDomainError("division by zero")
        return DualNumber(self.re / other.re, (self.du * other.re - self.re * other.du) / (other.re * other.re))

    def __neg__(self) -> "DualNumber":
        return DualNumber(-self.re, -self.du)

    def __pow__(self, n: int) -> "DualNumber":
        try:
            re = math.pow(self.re, n)
            du = n * math.pow(self.re, n - 1) * self.du
        except (ValueError, OverflowError, ZeroDivisionError):
            raise OracleDomainError(f"pow({self.re}, {n}) is undefined") from None
        return DualNumber(re, du)

    def sin(self) -> "DualNumber":
        return DualNumber(math.sin(self.re), self.du * math.cos(self.re))

    def cos(self) -> "DualNumber":
        return DualNumber(math.cos(self.re), -self.du * math.sin(self.re))

    def exp(self) -> "DualNumber":
        try:
            e = math.exp(self.re)
        except OverflowError:
            raise OracleDomainError("exp overflow") from None
        return DualNumber(e, self.du * e)

    def log(self) -> "DualNumber":
        if self.re <= 0:
            raise OracleDomainError("log of a non-positive number")
        return DualNumber(math.log(self.re), self.du / self.re)


_UNARY = {
    "sin": DualNumber.sin,
    "cos": DualNumber.cos,
    "exp": DualNumber.exp,
    "log": DualNumber.log,
    "sq": lambda d: d * d,
}


def _diff_expr(c: _Cursor, beta) -> DualNumber:
    value = _diff_term(c, beta)
    while c.peek() in ("+", "-"):
        op = c.take()
        rhs = _diff_term(c, beta)
        value = value + rhs if op == "+" else value - rhs
    return value


def _diff_term(c: _Cursor, beta) -> DualNumber:
    if c.peek() in ("+", "-"):
        sign = c.take()
        value = _diff_power(c, beta)
        if sign == "-":
            value = -value
    else:
        value = _diff_power(c, beta)
    while c.peek() in ("*", "/"):
        op = c.take()
        rhs = _diff_power(c, beta)
        value = value * rhs if op == "*" else value / rhs
    return value


def _diff_power(c: _Cursor, beta) -> DualNumber:
    value = _diff_atom(c, beta)
    while c.peek() == "^":
        c.take("^")
        value = value ** c.number()
    return value


def _diff_atom(c: _Cursor, beta) -> DualNumber:
    tok = c.peek()
    if tok is None:
        raise OracleError(f"{c.text!r}: unexpected end of input")
    if tok == "(":
        c.take("(")
        value = _diff_expr(c, beta)
        c.take(")")
        return value
    if tok in _UNARY:
        c.take()
        c.take("(")
        value = _diff_expr(c, beta)
        c.take(")")
        return _UNARY[tok](value)
    if tok == "pi":
        c.take()
        return DualNumber(math.pi)
    if tok.isdigit():
        n = DualNumber(c.number())
        nxt = c.peek()
        if nxt is not None and nxt.isalpha() and nxt not in _UNARY and nxt != "pi":
            return n * DualNumber(_lookup(beta, c.take()), 1.0)
        return n
    if tok.isalpha():
        return DualNumber(_lookup(beta, c.take()), 1.0)
    raise OracleError(f"{c.text!r}: unexpected token {tok!r}")


def forward_diff_oracle(text: str, beta: Mapping[str, Value]) -> Value:
    """Value and derivative of an expression in its variables, as a dual.

    Variables are seeded with derivative 1 and constants with 0; `+ - * / ^`,
    unary minus and plus, sin, cos, exp, log, sq and pi follow the chain rule.

    Raises:
        OracleDomainError: On division by zero or an undefined pow or log.
        OracleError: If the text is not an expression.
    """
    c = _Cursor(text)
    value = _diff_expr(c, beta)
    c.end()
    if not (math.isfinite(value.re) and math.isfinite(value.du)):
        raise OracleDomainError(f"{text!r} evaluates to a non-finite value")
    return Dual(value.re, value.du)


ORACLES: Dict[str, Callable[[str, Mapping[str, Value]], Value]] = {
    "count-ones": count_ones_oracle,
    "bin2int": bin2int_oracle,
    "prefix": prefix_oracle,
    "postfix": postfix_oracle,
    "calc": calc_oracle,
    "currency": currency_oracle,
    "ifelse": ifelse_oracle,
    "layout": layout_oracle,
    "forward-diff": forward_diff_oracle,
}
