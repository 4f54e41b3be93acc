"""Semantic values, builtin semantics and the Value JSON codec.

Every evaluation in agsynth (attribute rules, traces, DSL bodies and reference
oracles) computes over the variants defined here. Scalars inside the DSL
enumerator are plain Python numbers; the `scalar_*` functions give them exactly
the semantics that `apply_builtin` gives the wrapped variants, so inlined and
trace-evaluated bodies agree bit for bit.
"""

import json
import math
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Union

from synth_files.errors import EvalError, ValueCodecError

INT_LIMIT = 2**63

KINDS = ("int", "real", "bool", "dual", "tag")


@dataclass(frozen=True, slots=True)
class Int:
    i: int

    def __post_init__(self):
        if type(self.i) is not int:
            raise TypeError(f"Int expects an int, got {type(self.i).__name__}")
        if abs(self.i) >= INT_LIMIT:
            raise EvalError("integer overflow")


@dataclass(frozen=True, slots=True)
class Real:
    r: float

    def __post_init__(self):
        object.__setattr__(self, "r", _finite(self.r))


@dataclass(frozen=True, slots=True)
class Bool:
    b: bool

    def __post_init__(self):
        if type(self.b) is not bool:
            raise TypeError(f"Bool expects a bool, got {type(self.b).__name__}")


@dataclass(frozen=True, slots=True)
class Dual:
    """A dual number re + du·ε with ε² = 0."""

    re: float
    du: float

    def __post_init__(self):
        object.__setattr__(self, "re", _finite(self.re))
        object.__setattr__(self, "du", _finite(self.du))


@dataclass(frozen=True, slots=True)
class Tag:
    """An amount labeled with a currency."""

    label: str
    amount: float

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise ValueError("Tag label must be nonempty text")
        object.__setattr__(self, "amount", _finite(self.amount))


Value = Union[Int, Real, Bool, Dual, Tag]
Context = Dict[str, Value]
Scalar = Union[int, float, bool]


def _finite(x) -> float:
    if type(x) is bool or not isinstance(x, (int, float)):
        raise TypeError(f"expected a real number, got {type(x).__name__}")
    try:
        x = float(x)
    except OverflowError:
        raise EvalError("real overflow") from None
    if not math.isfinite(x):
        raise EvalError("non-finite real")
    return x


def kind_of(v: Value) -> str:
    """Return the kind name of a value ("int", "real", "bool", "dual" or "tag")."""
    if isinstance(v, Int):
        return "int"
    if isinstance(v, Real):
        return "real"
    if isinstance(v, Bool):
        return "bool"
    if isinstance(v, Dual):
        return "dual"
    if isinstance(v, Tag):
        return "tag"
    raise TypeError(f"not a Value: {v!r}")


def close(x: float, y: float, tol: float) -> bool:
    """Relative closeness |x-y| <= tol*max(1,|x|,|y|)."""
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def value_eq(a: Value, b: Value, tol: float = 1e-6) -> bool:
    """Compare two values; reals within relative tolerance, the rest exactly.

    Args:
        a (Value): First value.
        b (Value): Second value.
        tol (float): Relative tolerance, must be >= 0.

    Returns:
        bool: True iff same variant and components agree.

    Raises:
        ValueError: If tol is negative.
    """
    if tol < 0:
        raise ValueError("tolerance must be >= 0")
    if type(a) is not type(b):
        return False
    if isinstance(a, Int):
        return a.i == b.i
    if isinstance(a, Bool):
        return a.b == b.b
    if isinstance(a, Real):
        return close(a.r, b.r, tol)
    if isinstance(a, Dual):
        return close(a.re, b.re, tol) and close(a.du, b.du, tol)
    return a.label == b.label and close(a.amount, b.amount, tol)


# Scalar semantics


def _is_num(x) -> bool:
    return type(x) is int or type(x) is float


def _need_nums(op: str, *xs) -> None:
    for x in xs:
        if not _is_num(x):
            raise EvalError(f"{op} expects numbers, got {type(x).__name__}")


def _fix(x):
    if type(x) is int:
        if abs(x) >= INT_LIMIT:
            raise EvalError("integer overflow")
        return x
    if not math.isfinite(x):
        raise EvalError("non-finite real")
    return x


def scalar_add(x, y):
    _need_nums("add", x, y)
    return _fix(x + y)


def scalar_sub(x, y):
    _need_nums("sub", x, y)
    return _fix(x - y)


def scalar_mul(x, y):
    _need_nums("mul", x, y)
    return _fix(x * y)


def scalar_div(x, y):
    _need_nums("div", x, y)
    if y == 0:
        raise EvalError("division by zero")
    if type(x) is int and type(y) is int:
        q = abs(x) // abs(y)
        return -q if (x < 0) != (y < 0) else q
    return _fix(x / y)


def scalar_neg(x):
    _need_nums("neg", x)
    return -x


def scalar_sin(x):
    _need_nums("sin", x)
    return math.sin(x)


def scalar_cos(x):
    _need_nums("cos", x)
    return math.cos(x)


def scalar_exp(x):
    _need_nums("exp", x)
    try:
        return _fix(math.exp(x))
    except OverflowError:
        raise EvalError("exp overflow") from None


def scalar_log(x):
    _need_nums("log", x)
    if x <= 0:
        raise EvalError("log of a non-positive number")
    return math.log(x)


def scalar_pow(x, n):
    _need_nums("pow", x, n)
    if x == 0 and n < 0:
        raise EvalError("pow of zero with a negative exponent")
    if type(x) is int and type(n) is int and n >= 0:
        if abs(x) > 1 and n * math.log2(abs(x)) >= 63:
            raise EvalError("integer overflow")
        return x**n
    xf, nf = float(x), float(n)
    if xf < 0 and not nf.is_integer():
        raise EvalError("pow with negative base and fractional exponent")
    try:
        return _fix(math.pow(xf, nf))
    except (OverflowError, ValueError):
        raise EvalError("pow out of range") from None


def scalar_real(x):
    _need_nums("real", x)
    return float(x)


def scalar_eq(x, y):
    if type(x) is bool or type(y) is bool:
        if type(x) is not type(y):
            raise EvalError("eq compares a bool with a number")
        return x == y
    _need_nums("eq", x, y)
    return x == y


def scalar_lt(x, y):
    _need_nums("lt", x, y)
    return x < y


def scalar_le(x, y):
    _need_nums("le", x, y)
    return x <= y


def scalar_ite(c, x, y):
    if type(c) is not bool:
        raise EvalError("ite condition must be a bool")
    return x if c else y


SCALAR_OPS: Dict[str, Callable] = {
    "add": scalar_add,
    "sub": scalar_sub,
    "mul": scalar_mul,
    "div": scalar_div,
    "neg": scalar_neg,
    "sin": scalar_sin,
    "cos": scalar_cos,
    "exp": scalar_exp,
    "log": scalar_log,
    "pow": scalar_pow,
    "real": scalar_real,
    "eq": scalar_eq,
    "lt": scalar_lt,
    "le": scalar_le,
    "ite": scalar_ite,
}

# name -> arity for every builtin usable in actions
BUILTIN_ARITY: Dict[str, int] = {
    "add": 2,
    "sub": 2,
    "mul": 2,
    "div": 2,
    "neg": 1,
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "log": 1,
    "pow": 2,
    "real": 1,
    "eq": 2,
    "lt": 2,
    "le": 2,
    "ite": 3,
    "Dual": 2,
    "tag": 2,
    "re": 1,
    "du": 1,
}

ARITHMETIC = ("add", "sub", "mul", "div", "neg", "sin", "cos", "exp", "log", "pow")


def to_scalar(v: Value) -> Scalar:
    """Unwrap an Int, Real or Bool."""
    if isinstance(v, Int):
        return v.i
    if isinstance(v, Real):
        return v.r
    if isinstance(v, Bool):
        return v.b
    raise EvalError(f"expected a scalar, got {kind_of(v)}")


def from_scalar(x: Scalar) -> Value:
    """Wrap a Python scalar as Int, Real or Bool."""
    if type(x) is bool:
        return Bool(x)
    if type(x) is int:
        return Int(x)
    return Real(x)


def _as_dual(v: Value) -> Dual:
    if isinstance(v, Dual):
        return v
    if isinstance(v, (Int, Real)):
        return Dual(to_scalar(v), 0.0)
    raise EvalError(f"expected a number or dual, got {kind_of(v)}")


def _dual_op(op: str, args: Sequence[Value]) -> Dual:
    if op == "pow":
        base, n = _as_dual(args[0]), args[1]
        if isinstance(n, Dual):
            raise EvalError("pow with a dual exponent")
        n = to_scalar(n)
        re = scalar_pow(base.re, n)
        du = 0.0 if n == 0 else scalar_mul(scalar_mul(n, scalar_pow(base.re, n - 1)), base.du)
        return Dual(re, du)
    xs = [_as_dual(a) for a in args]
    a = xs[0]
    if op == "neg":
        return Dual(-a.re, -a.du)
    if op == "sin":
        return Dual(math.sin(a.re), a.du * math.cos(a.re))
    if op == "cos":
        return Dual(math.cos(a.re), -a.du * math.sin(a.re))
    if op == "exp":
        e = scalar_exp(a.re)
        return Dual(e, a.du * e)
    if op == "log":
        return Dual(scalar_log(a.re), a.du / a.re)
    b = xs[1]
    if op == "add":
        return Dual(a.re + b.re, a.du + b.du)
    if op == "sub":
        return Dual(a.re - b.re, a.du - b.du)
    if op == "mul":
        return Dual(a.re * b.re, a.du * b.re + a.re * b.du)
    if b.re == 0:
        raise EvalError("division by zero")
    return Dual(a.re / b.re, (a.du * b.re - a.re * b.du) / (b.re * b.re))


def _tag_op(op: str, args: Sequence[Value]) -> Tag:
    if op == "neg":
        return Tag(args[0].label, -args[0].amount)
    if op not in ("add", "sub", "mul", "div"):
        raise EvalError(f"{op} is not defined on currencies")
    x, y = args
    if op in ("add", "sub"):
        if not (isinstance(x, Tag) and isinstance(y, Tag)):
            raise EvalError(f"{op} mixes a currency with a scalar")
        if x.label != y.label:
            raise EvalError(f"{op} mixes currencies {x.label} and {y.label}")
        f = scalar_add if op == "add" else scalar_sub
        return Tag(x.label, f(x.amount, y.amount))
    if isinstance(x, Tag) and isinstance(y, Tag):
        raise EvalError("multiplying or dividing two currencies is not allowed")
    if op == "div":
        if not isinstance(x, Tag):
            raise EvalError("dividing a scalar by a currency is not allowed")
        return Tag(x.label, scalar_div(x.amount, float(to_scalar(y))))
    tag, k = (x, y) if isinstance(x, Tag) else (y, x)
    return Tag(tag.label, scalar_mul(tag.amount, to_scalar(k)))


def apply_builtin(op: str, args: Sequence[Union[Value, str]]) -> Value:
    """Apply a builtin to evaluated arguments.

    Args:
        op (str): Builtin name (see BUILTIN_ARITY).
        args (Sequence): Argument values; `tag` takes its label as text.

    Returns:
        Value: The result.

    Raises:
        EvalError: On domain errors and kind mismatches.
    """
    arity = BUILTIN_ARITY.get(op)
    if arity is None:
        raise EvalError(f"unknown builtin {op}")
    if len(args) != arity:
        raise EvalError(f"{op} expects {arity} arguments, got {len(args)}")
    if op == "tag":
        label, amount = args
        if not isinstance(label, str):
            raise EvalError("tag expects a text label")
        return Tag(label, float(to_scalar(amount)))
    if op == "Dual":
        re, du = (to_scalar(a) for a in args)
        _need_nums("Dual", re, du)
        return Dual(re, du)
    if op == "re":
        return Real(_as_dual(args[0]).re)
    if op == "du":
        return Real(_as_dual(args[0]).du)
    if op == "ite":
        cond = args[0]
        if not isinstance(cond, Bool):
            raise EvalError("ite condition must be a bool")
        return args[1] if cond.b else args[2]
    if op in ARITHMETIC:
        if any(isinstance(a, Tag) for a in args):
            return _tag_op(op, args)
        if any(isinstance(a, Dual) for a in args):
            return _dual_op(op, args)
    return from_scalar(SCALAR_OPS[op](*(to_scalar(a) for a in args)))


# JSON codec


def value_to_json(v: Value) -> dict:
    """Return the JSON object form of a value."""
    if isinstance(v, Int):
        return {"int": v.i}
    if isinstance(v, Real):
        return {"real": v.r}
    if isinstance(v, Bool):
        return {"bool": v.b}
    if isinstance(v, Dual):
        return {"dual": [v.re, v.du]}
    if isinstance(v, Tag):
        return {"tag": [v.label, v.amount]}
    raise TypeError(f"not a Value: {v!r}")


def _number(x, what: str) -> float:
    if type(x) is bool or not isinstance(x, (int, float)):
        raise ValueCodecError(f"{what} must be a number")
    return float(x)


def value_from_json(obj) -> Value:
    """Build a value from its JSON object form.

    Raises:
        ValueCodecError: If the object is not a single-key Value form.
    """
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueCodecError("a value is an object with exactly one key")
    (key, body), = obj.items()
    try:
        if key == "int":
            if type(body) is not int:
                raise ValueCodecError("int payload must be an integer")
            return Int(body)
        if key == "real":
            return Real(_number(body, "real payload"))
        if key == "bool":
            if type(body) is not bool:
                raise ValueCodecError("bool payload must be true or false")
            return Bool(body)
        if key == "dual":
            if not isinstance(body, list) or len(body) != 2:
                raise ValueCodecError("dual payload must be [re, du]")
            return Dual(_number(body[0], "dual re"), _number(body[1], "dual du"))
        if key == "tag":
            if not isinstance(body, list) or len(body) != 2 or not isinstance(body[0], str):
                raise ValueCodecError("tag payload must be [label, amount]")
            return Tag(body[0], _number(body[1], "tag amount"))
    except (EvalError, ValueError) as e:
        if isinstance(e, ValueCodecError):
            raise
        raise ValueCodecError(str(e)) from None
    raise ValueCodecError(f"unknown value kind {key!r}")


def format_value(v: Value) -> str:
    """Format a value as compact JSON, e.g. {"dual":[26.0,10.0]}."""
    return json.dumps(value_to_json(v), separators=(",", ":"))


def parse_value(text: str) -> Value:
    """Parse compact or spaced Value JSON text.

    Raises:
        ValueCodecError: With the character position of malformed JSON.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueCodecError(e.msg, e.pos) from None
    return value_from_json(obj)


def show_value(v: Value) -> str:
    """Human-readable rendering used in reports, e.g. 26 + 10ε."""
    if isinstance(v, Dual):
        sign = "-" if v.du < 0 else "+"
        return f"{v.re:.6g} {sign} {abs(v.du):.6g}ε"
    if isinstance(v, Tag):
        return f"{v.label} {v.amount:.2f}"
    if isinstance(v, Real):
        return f"{v.r:.6g}"
    if isinstance(v, Bool):
        return "true" if v.b else "false"
    return str(v.i)
