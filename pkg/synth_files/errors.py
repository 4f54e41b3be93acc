"""Exception hierarchy shared by every agsynth module.

Errors that callers are expected to inspect carry the offending location
(line, position, instance or example) as attributes as well as in the message.
"""

from typing import Optional, Sequence


class AgSynthError(Exception):
    """Base class for all agsynth errors."""


class SketchError(AgSynthError, ValueError):
    """Raised when a sketch file fails to parse or validate.

    Attributes:
        line (Optional[int]): 1-based line number of the offending construct.
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LexError(AgSynthError, ValueError):
    """Raised when no terminal pattern matches at a position."""

    def __init__(self, position: int, char: str = ""):
        self.position = position
        super().__init__(f"unrecognized character {char!r} at {position}")


class ParseError(AgSynthError, ValueError):
    """Base class for parse failures."""


class NoParse(ParseError):
    """The input is not in the language; `position` is the furthest failure."""

    def __init__(self, position: int, expected: Sequence[str] = ()):
        self.position = position
        self.expected = tuple(expected)
        hint = f", expected one of {', '.join(self.expected)}" if self.expected else ""
        super().__init__(f"no parse: failure at position {position}{hint}")


class Ambiguous(ParseError):
    """The parse forest for this input holds two or more trees."""

    def __init__(self, text: str):
        self.text = text
        super().__init__(f"ambiguous input: {text!r}")


class ScheduleError(AgSynthError):
    """Base class for attribute scheduling failures."""


class Circular(ScheduleError):
    """Attribute dependencies of one tree form a cycle."""

    def __init__(self, cycle: Sequence[object]):
        self.cycle = list(cycle)
        super().__init__("circular attribute dependencies: " + " -> ".join(map(str, self.cycle)))


class MissingRule(ScheduleError):
    """An attribute instance is read but no rule defines it."""

    def __init__(self, instance: object):
        self.instance = instance
        super().__init__(f"attribute instance {instance} is read but never defined")


class EvalError(AgSynthError, ArithmeticError):
    """Evaluation failed (division by zero, unbound variable, domain error).

    Attributes:
        where (Optional[str]): instance, step or expression being evaluated.
    """

    def __init__(self, message: str, where: Optional[str] = None):
        self.where = where
        self.reason = message
        if where:
            message = f"{message} (at {where})"
        super().__init__(message)


class ValueCodecError(AgSynthError, ValueError):
    """Malformed Value JSON text."""

    def __init__(self, message: str, position: int = 0):
        self.position = position
        super().__init__(f"{message} at position {position}")


class OracleError(AgSynthError):
    """An oracle failed or broke the query protocol."""

    def __init__(self, message: str, request: Optional[dict] = None):
        self.request = request
        super().__init__(message)


class OracleDomainError(OracleError):
    """A reference oracle hit a domain error; the caller may resample."""


class BudgetExhausted(AgSynthError):
    """The candidate budget ran out before the search space did."""


class ThrashingError(AgSynthError):
    """The refutation cap was reached.

    Attributes:
        holes (dict): eviction counts per hole, most evicted first.
    """

    def __init__(self, holes: dict):
        self.holes = dict(holes)
        listing = ", ".join(f"{h} x{n}" for h, n in self.holes.items())
        super().__init__(f"refutation cap reached; thrashing holes: {listing}")


class ExampleError(AgSynthError):
    """Parsing or evaluating one example failed."""

    def __init__(self, text: str, cause: Exception):
        self.text = text
        self.cause = cause
        super().__init__(f"example {text!r}: {cause}")
