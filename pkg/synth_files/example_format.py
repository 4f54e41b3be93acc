"""JSON-lines example files.

One object per line:

    {"input":"x^2+4*x+5","context":{"x":{"int":3}},"output":{"dual":[26.0,10.0]}}
"""

# Import Libraries
import json
from typing import Iterable, List

from pydantic import ValidationError

from synth_files.errors import ValueCodecError
from synth_files.synth_states import ExampleRecord
from synth_files.synthesis import Example
from synth_files.values import value_from_json, value_to_json


def example_of(record: ExampleRecord) -> Example:
    """Decode a record.

    Raises:
        ValueCodecError: If a context or output value is malformed.
    """
    context = {k: value_from_json(v) for k, v in record.context.items()}
    return Example.of(record.input, context, value_from_json(record.output))


def record_of(ex: Example) -> ExampleRecord:
    return ExampleRecord(
        input=ex.input,
        context={k: value_to_json(v) for k, v in ex.context},
        output=value_to_json(ex.output),
    )


def load_examples(text: str) -> List[Example]:
    """Parse an examples file; blank lines are skipped.

    Raises:
        ValueError: Naming the line of the first malformed example.
    """
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(example_of(ExampleRecord.model_validate_json(line)))
        except (ValidationError, ValueCodecError) as e:
            raise ValueError(f"examples line {n}: {e}") from None
    return out


def dump_examples(examples: Iterable[Example]) -> str:
    """Write examples as JSON lines with sorted keys."""
    lines = [json.dumps(record_of(ex).model_dump(), sort_keys=True, separators=(",", ":")) for ex in examples]
    return "".join(line + "\n" for line in lines)
