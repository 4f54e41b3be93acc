# Import Libraries
import logging
from functools import lru_cache
from typing import Dict, List

from langchain_core.runnables import RunnableLambda
from langgraph.graph import END, START, StateGraph

from synth_files.dsl import DslExpr, parse_expr, show_expr
from synth_files.errors import OracleError, SketchError, ThrashingError
from synth_files.example_format import example_of, record_of
from synth_files.examplegen import FOUND, ZERO_SAMPLES, CoverageState, derivation_coverage, generate_suite, validate
from synth_files.grammar import Sketch, complete, used_holes
from synth_files.oracles import OracleHandle
from synth_files.parser import parse_text, prod_set
from synth_files.sketch_format import dump_sketch, load_sketch
from synth_files.synth_states import InputState, OutputState, PipelineState, RunReport
from synth_files.synthesis import Example, SynthResult, all_at_once, check_examples, synth_attr_grammar
from synth_files.values import show_value

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def _sketch(text: str) -> Sketch:
    return load_sketch(text)


@lru_cache(maxsize=32)
def _oracle(spec: str) -> OracleHandle:
    return OracleHandle.parse(spec)


def _examples(state: PipelineState) -> List[Example]:
    return [example_of(r) for r in state.examples]


def _bodies(s: Sketch, bodies: Dict[str, str]) -> Dict[str, DslExpr]:
    return {h: parse_expr(text, s.hole(h).signature) for h, text in bodies.items()}


def _message(result: SynthResult, state: PipelineState) -> str:
    where = f" (at example {result.failed})" if result.failed is not None else ""
    if result.status == "unsat":
        return f"no solution within DSL size bound {state.budget.max_size}{where}"
    if result.status == "budget":
        return f"candidate budget of {state.budget.max_candidates} exhausted{where}"
    return f"completed {len(result.ready or {})} holes"


def generate_examples(state: PipelineState) -> dict:
    """Extend the given examples with a generated suite when an oracle is set.

    Args:
        state (PipelineState): Sketch, initial examples, oracle and target.

    Returns:
        dict: The example suite, given examples first.
    """
    s = _sketch(state.sketch_text)
    examples = _examples(state)
    if state.oracle and state.target_sets:
        cov = CoverageState()
        for ex in examples:
            cov.add(prod_set(parse_text(s, ex.input)))
        suite = generate_suite(
            s, _oracle(state.oracle), state.target_sets, seed=state.seed, max_depth=state.bounds.max_depth, cov=cov
        )
        examples += [ex for ex in suite.examples if ex not in examples]
    if not examples:
        raise ValueError("no examples: give an examples file or an oracle with target_sets > 0")
    return {"examples": [record_of(ex) for ex in examples]}


def synthesize(state: PipelineState) -> dict:
    """Run incremental or all-at-once synthesis over the current suite.

    Args:
        state (PipelineState): Sketch, suite, algorithm and budget.

    Returns:
        dict: The run report, the bodies found and the running candidate count.
    """
    s = _sketch(state.sketch_text)
    examples = _examples(state)
    base = dict(total=len(examples), algo=state.algo, seed=state.seed, coverage=derivation_coverage(s, [ex.input for ex in examples]))
    try:
        if state.algo == "all-at-once":
            result = all_at_once(s, examples, None, state.budget, state.tol)
        else:
            result = synth_attr_grammar(s, examples, None, state.budget, state.tol, state.debug)
    except ThrashingError as e:
        report = RunReport(status="thrashing", message=str(e), candidates=state.candidates, **base)
        return {"report": report, "bodies": {}, "completed_text": None, "pending_fix": False}
    candidates = state.candidates + result.candidates
    bodies = {h: show_expr(e) for h, e in sorted((result.ready or {}).items())}
    report = RunReport(
        bodies=bodies,
        refutations=result.refutations,
        candidates=candidates,
        status=result.status,
        message=_message(result, state),
        **base,
    )
    logger.info("synthesis %s: %s", report.status, report.message)
    return {"report": report, "bodies": bodies, "candidates": candidates, "completed_text": None, "pending_fix": False}


def check(state: PipelineState) -> dict:
    """Replay the suite on the completed grammar.

    Args:
        state (PipelineState): Sketch, suite and synthesized bodies.

    Returns:
        dict: The report with its pass count, and the completed grammar text.
    """
    s = _sketch(state.sketch_text)
    try:
        g = complete(s, _bodies(s, state.bodies))
    except SketchError:
        missing = sorted(used_holes(s) - set(state.bodies))
        update = {"status": "incomplete", "message": f"holes not reached by any example: {', '.join(missing)}"}
        return {"report": state.report.model_copy(update=update)}
    results = check_examples(g, _examples(state), state.tol)
    failures = [(ex, got, err) for ex, got, err in results if err is not None]
    update = {"passed": len(results) - len(failures)}
    if failures:
        ex, got, err = failures[0]
        shown = show_value(got) if got is not None else "error"
        update.update(status="check-failed", message=f"replay of {ex} gave {shown}: {err}")
        logger.error("completed grammar fails %d examples", len(failures))
    return {"report": state.report.model_copy(update=update), "completed_text": dump_sketch(g)}


def validate_completion(state: PipelineState) -> dict:
    """Look for a distinguishing input; append it to the suite when found.

    Disagreements the oracle settled in favour of the current bodies are added
    to the suite as well; they need no resynthesis.

    Args:
        state (PipelineState): Completed bodies, suite, oracle and bounds.

    Returns:
        dict: Validation outcome, and the grown suite when a fix is pending.
    """
    if not state.oracle or state.validation_rounds == 0:
        return {"validation": "skipped", "pending_fix": False}
    s = _sketch(state.sketch_text)
    outcome = validate(
        s,
        _bodies(s, state.bodies),
        _examples(state),
        s.dsl,
        _oracle(state.oracle),
        state.bounds,
        seed=state.seed + state.rounds,
        budget=state.budget,
        tol=state.tol,
    )
    rounds = state.rounds + 1
    fresh = []
    for r in map(record_of, outcome.confirmed):
        if r not in state.examples and r not in fresh:
            fresh.append(r)
    suite = state.examples + fresh
    # Confirmed examples pass the current bodies
    report = state.report.model_copy(update={"passed": state.report.passed + len(fresh), "total": state.report.total + len(fresh)})
    if outcome.status == ZERO_SAMPLES:
        return {"validation": "zero-samples", "rounds": rounds, "pending_fix": False}
    if outcome.status != FOUND:
        verdict = f"fixed({state.fixes})" if state.fixes else "unique"
        return {"validation": verdict, "rounds": rounds, "pending_fix": False, "examples": suite, "report": report}
    if state.fixes >= state.validation_rounds:
        logger.warning("distinguishing input remains after %d fixes: %s", state.fixes, outcome.example)
        return {"validation": "open", "rounds": rounds, "pending_fix": False, "examples": suite, "report": report}
    logger.info("appending distinguishing example %s", outcome.example)
    return {
        "examples": suite + [record_of(outcome.example)],
        "fixes": state.fixes + 1,
        "rounds": rounds,
        "pending_fix": True,
        "validation": "open",
    }


def _after_synthesize(state: PipelineState) -> str:
    return "check" if state.report is not None and state.report.status == "ok" else END


def _after_check(state: PipelineState) -> str:
    return "validate" if state.report.status == "ok" else END


def _after_validate(state: PipelineState) -> str:
    return "synthesize" if state.pending_fix else END


# Oracle-backed nodes retry on oracle failures
generate_retriable = RunnableLambda(generate_examples).with_retry(
    retry_if_exception_type=(OracleError,), stop_after_attempt=2
)
validate_retriable = RunnableLambda(validate_completion).with_retry(
    retry_if_exception_type=(OracleError,), stop_after_attempt=2
)

# Build pipeline graph
builder = StateGraph(PipelineState, input_schema=InputState, output_schema=OutputState)

builder.add_node("generate_examples", generate_retriable)
builder.add_node("synthesize", synthesize)
builder.add_node("check", check)
builder.add_node("validate", validate_retriable)

builder.add_edge(START, "generate_examples")
builder.add_edge("generate_examples", "synthesize")
builder.add_conditional_edges("synthesize", _after_synthesize, ["check", END])
builder.add_conditional_edges("check", _after_check, ["validate", END])

# A distinguishing example sends the suite back to synthesis
builder.add_conditional_edges("validate", _after_validate, ["synthesize", END])

pipeline_graph = builder.compile()


# helper function to invoke graph
def run_pipeline(data: InputState) -> OutputState:
    """Generate, synthesize, check and validate in one run.

    Args:
        data (InputState): Sketch text, examples, oracle and bounds.

    Returns:
        OutputState: Final report, completed grammar text, validation verdict
            and the final example suite.
    """
    limit = 4 * (data.validation_rounds + 2) + 4
    result = pipeline_graph.invoke(data, config={"recursion_limit": limit})
    return OutputState(**result)
