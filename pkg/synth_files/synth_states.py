# Import Libraries
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class ExampleRecord(BaseModel):
    """One line of an examples file.

    Attributes:
        input (str): Example input string.
        context (dict[str, dict]): Value JSON per free variable.
        output (dict): Expected Value JSON.
    """

    input: str = Field(description="The example input string, parsed by the sketch grammar")
    context: Dict[str, dict] = Field(
        default_factory=dict,
        description="Value JSON objects binding the free variables of the input",
    )
    output: dict = Field(description="The intended semantic value as a Value JSON object")


class SynthesisBudget(BaseModel):
    """Search bounds of one synthesis run.

    Attributes:
        max_size (int): Max DSL size of any hole body.
        max_candidates (int): Max candidates examined per synthesize call.
        max_refutations (int): Refutation cap of incremental synthesis.
        seed (int): Seed of sample environments.
        bank_size (int): Largest size enumerated exhaustively for goal-directed holes.
    """

    max_size: int = Field(16, gt=0, description="Largest DSL expression size per hole body")
    max_candidates: int = Field(1_000_000, gt=0, description="Candidates examined per synthesize call")
    max_refutations: int = Field(16, gt=0, description="Refutations allowed before giving up")
    seed: int = Field(0, ge=0, description="Random seed for sample environments")
    bank_size: int = Field(5, gt=0, description="Exhaustive bank level used by goal-directed search")


class ValidationBounds(BaseModel):
    """Bounds of the distinguishing-input search.

    Attributes:
        strings (int): K sampled strings per alternate completion; 0 disables validation.
        contexts (int): C contexts per sampled string.
        max_alternates (int): Alternate bodies tried per hole.
        hole_pairs (bool): Also rebind pairs of holes that one example reaches.
        max_depth (int): Depth budget of the string sampler.
    """

    strings: int = Field(24, ge=0, description="Strings sampled per alternate completion")
    contexts: int = Field(3, gt=0, description="Contexts sampled per string")
    max_alternates: int = Field(3, ge=0, description="Alternate bodies tried per hole")
    hole_pairs: bool = Field(True, description="Also rebind pairs of holes reached by one example")
    max_depth: int = Field(12, gt=0, description="Depth budget of the string sampler")


class CoverageSummary(BaseModel):
    """Derivation coverage of a set of strings.

    Attributes:
        q1_count (int): Distinct production sets achieved.
        covered (list[int]): Productions occurring in some derivation.
        total_prods (int): |P|.
        fraction_log2 (float): log2|Q1| - |P|.
    """

    q1_count: int = Field(ge=0)
    covered: List[int] = Field(default_factory=list)
    total_prods: int = Field(ge=0)
    fraction_log2: float = Field(description="log2 of the derivation coverage fraction")


class RunReport(BaseModel):
    """Outcome of one synthesis run, as printed by the CLI.

    Attributes:
        bodies (dict[str, str]): Pretty-printed body per hole.
        passed (int): Examples the completion passes.
        total (int): Examples in the suite.
        refutations (int): Refutation count.
        candidates (int): Candidates examined over all synthesize calls.
        status (str): "ok", "unsat", "budget", "thrashing", "incomplete" (a hole
            no example reaches) or "check-failed" (the replay disagreed).
        algo (str): "incremental" or "all-at-once".
        coverage (Optional[CoverageSummary]): Coverage of the suite.
        seed (int): Seed of the run.
        message (str): Human-readable diagnostic.
    """

    bodies: Dict[str, str] = Field(default_factory=dict)
    passed: int = Field(0, ge=0)
    total: int = Field(0, ge=0)
    refutations: int = Field(0, ge=0)
    candidates: int = Field(0, ge=0)
    status: str = Field("ok", description="ok, unsat, budget, thrashing, incomplete or check-failed")
    algo: str = "incremental"
    coverage: Optional[CoverageSummary] = None
    seed: int = Field(0, ge=0)
    message: str = ""


class BenchRow(BaseModel):
    """One row of the benchmark table.

    Attributes:
        id (str): Benchmark id.
        prods (int): Production count.
        holes (int): Hole count.
        examples (int): Examples in the final suite.
        passed (int): Examples the completion passes.
        refutations (int): Refutation count of the final run.
        candidates (int): Candidates examined over all runs.
        algo (str): Algorithm used.
        validation (str): "unique", "fixed(n)", "skipped" or "open".
        status (str): "PASS" or "FAIL".
    """

    id: str
    prods: int = Field(ge=0)
    holes: int = Field(ge=0)
    examples: int = Field(0, ge=0)
    passed: int = Field(0, ge=0)
    refutations: int = Field(0, ge=0)
    candidates: int = Field(0, ge=0)
    algo: str = "incremental"
    validation: str = "skipped"
    status: str = "FAIL"


class InputState(BaseModel):
    """Input schema of the synthesis pipeline.

    Attributes:
        sketch_text (str): Sketch file text.
        examples (list[ExampleRecord]): Initial examples.
        oracle (Optional[str]): Oracle spec, "builtin:NAME" or "cmd:SHELL".
        algo (str): "incremental" or "all-at-once".
        target_sets (int): Production sets to generate; 0 generates none.
        budget (SynthesisBudget): Search bounds.
        bounds (ValidationBounds): Validation bounds.
        tol (float): Comparison tolerance.
        seed (int): Seed of generation and validation.
        validation_rounds (int): Max distinguishing examples appended.
        debug (bool): Assert the incremental loop invariant every iteration.
    """

    sketch_text: str = Field(min_length=1, description="Sketch file text")
    examples: List[ExampleRecord] = Field(default_factory=list)
    oracle: Optional[str] = Field(default=None, description="builtin:NAME or cmd:SHELL")
    algo: str = Field("incremental", pattern="^(incremental|all-at-once)$")
    target_sets: int = Field(0, ge=0)
    budget: SynthesisBudget = Field(default_factory=SynthesisBudget)
    bounds: ValidationBounds = Field(default_factory=ValidationBounds)
    tol: float = Field(1e-6, ge=0)
    seed: int = Field(0, ge=0)
    validation_rounds: int = Field(4, ge=0)
    debug: bool = False


class OutputState(BaseModel):
    """Output schema of the synthesis pipeline.

    Attributes:
        report (Optional[RunReport]): Report of the last synthesis run.
        completed_text (Optional[str]): Completed grammar in sketch format.
        validation (str): "unique", "fixed(n)", "open", "zero-samples" or "skipped".
        examples (list[ExampleRecord]): Final example suite.
    """

    report: Optional[RunReport] = None
    completed_text: Optional[str] = None
    validation: str = "skipped"
    examples: List[ExampleRecord] = Field(default_factory=list)


class PipelineState(InputState, OutputState):
    """Central state threaded through the pipeline graph.

    Attributes:
        bodies (dict[str, str]): Current bodies, pretty-printed.
        rounds (int): Validation rounds run so far.
        fixes (int): Distinguishing examples appended so far.
        pending_fix (bool): A distinguishing example was just appended.
        candidates (int): Candidates examined over all synthesis runs.
    """

    bodies: Dict[str, str] = Field(default_factory=dict)
    rounds: int = Field(0, ge=0)
    fixes: int = Field(0, ge=0)
    pending_fix: bool = False
    candidates: int = Field(0, ge=0)


class SynthRequest(BaseModel):
    """Body of POST /synth/.

    Attributes:
        sketch (str): Sketch file text.
        examples (list[ExampleRecord]): Examples to satisfy.
        algo (str): "incremental" or "all-at-once".
        dsl_size_max (int): Max DSL size per hole body.
        max_candidates (int): Candidates per synthesize call.
        seed (int): Sample seed.
        tol (float): Comparison tolerance.
    """

    sketch: str = Field(min_length=1)
    examples: List[ExampleRecord] = Field(min_length=1)
    algo: str = Field("incremental", pattern="^(incremental|all-at-once)$")
    dsl_size_max: int = Field(16, gt=0)
    max_candidates: int = Field(1_000_000, gt=0)
    seed: int = Field(0, ge=0)
    tol: float = Field(1e-6, ge=0)


class SynthResponse(BaseModel):
    """Body returned by POST /synth/."""

    report: RunReport
    completed: Optional[str] = Field(default=None, description="Completed grammar text, on success")


class CheckRequest(BaseModel):
    """Body of POST /check/."""

    sketch: str = Field(min_length=1, description="A hole-free grammar in sketch format")
    examples: List[ExampleRecord] = Field(min_length=1)
    tol: float = Field(1e-6, ge=0)


class CheckResult(BaseModel):
    """Per-example outcome of a replay.

    Attributes:
        input (str): Example input.
        ok (bool): Whether the grammar reproduces the output.
        got (Optional[str]): Value computed, shown.
        error (Optional[str]): Evaluation error, if any.
    """

    input: str
    ok: bool
    got: Optional[str] = None
    error: Optional[str] = None


class CheckResponse(BaseModel):
    """Body returned by POST /check/."""

    passed: int = Field(ge=0)
    total: int = Field(ge=0)
    results: List[CheckResult] = Field(default_factory=list)
