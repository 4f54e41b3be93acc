"""Oracles: the intended semantic value of a string under a context.

An oracle is named by a spec string:

    builtin:NAME   a reference oracle of the built-in benchmarks
    cmd:SHELL      an external command; one query per process

The external protocol writes one JSON object {"input": ..., "context": ...} on
the command's standard input and expects one Value JSON object on its standard
output with exit status 0. Anything else is a protocol error.
"""

# Import Libraries
import json
import logging
import subprocess
from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

from synth_files.errors import OracleError, ValueCodecError
from synth_files.values import Value, format_value, parse_value, value_to_json

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0


def _builtin_table() -> dict:
    from app.bench.reference import ORACLES

    return ORACLES


@dataclass
class OracleHandle:
    """A builtin or external oracle with a per-handle answer cache.

    Attributes:
        kind (str): "builtin" or "cmd".
        target (str): Builtin name or shell command line.
        timeout (float): Seconds allowed per external query.
        queries (int): Queries answered without the cache.
    """

    kind: str
    target: str
    timeout: float = DEFAULT_TIMEOUT
    queries: int = 0
    _cache: Dict[Tuple[str, str], Value] = field(default_factory=dict, repr=False)

    @classmethod
    def parse(cls, spec: str, timeout: float = DEFAULT_TIMEOUT) -> "OracleHandle":
        """Build a handle from "builtin:NAME" or "cmd:SHELL".

        Raises:
            ValueError: If the spec has another form or names an unknown builtin.
        """
        kind, sep, target = spec.partition(":")
        if not sep or not target.strip():
            raise ValueError(f"oracle must be builtin:NAME or cmd:SHELL, got {spec!r}")
        if kind == "builtin":
            if target not in _builtin_table():
                raise ValueError(f"unknown builtin oracle {target!r}; known: {', '.join(sorted(_builtin_table()))}")
        elif kind != "cmd":
            raise ValueError(f"unknown oracle kind {kind!r}")
        return cls(kind, target, timeout)

    @property
    def spec(self) -> str:
        return f"{self.kind}:{self.target}"

    def query(self, text: str, beta: Mapping[str, Value]) -> Value:
        """Ask the oracle for the value of `text` under `beta`.

        Raises:
            OracleDomainError: If a builtin oracle hits a domain error.
            OracleError: On any other oracle failure.
        """
        context = {k: value_to_json(v) for k, v in sorted(beta.items())}
        key = (text, json.dumps(context, sort_keys=True))
        if key in self._cache:
            return self._cache[key]
        if self.kind == "builtin":
            value = _builtin_table()[self.target](text, beta)
        else:
            value = self._run({"input": text, "context": context})
        self.queries += 1
        self._cache[key] = value
        logger.debug("oracle %s: %r -> %s", self.spec, text, format_value(value))
        return value

    def _run(self, request: dict) -> Value:
        try:
            result = subprocess.run(
                self.target,
                shell=True,
                input=json.dumps(request),
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except subprocess.TimeoutExpired:
            raise OracleError(f"oracle timed out after {self.timeout}s", request) from None
        except OSError as e:
            raise OracleError(f"cannot run oracle: {e}", request) from None
        if result.returncode != 0:
            detail = result.stderr.strip().splitlines()[-1] if result.stderr.strip() else "no message"
            raise OracleError(f"oracle exited with status {result.returncode} ({detail})", request)
        try:
            return parse_value(result.stdout.strip())
        except ValueCodecError as e:
            raise OracleError(f"malformed oracle reply {result.stdout.strip()!r}: {e}", request) from None
