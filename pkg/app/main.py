"""FastAPI application for the attribute-grammar synthesis service.

This module sets up the FastAPI application with endpoints for synthesizing
the semantic actions of a sketch, replaying examples on a completed grammar,
and service health checks.
"""

# Import Libraries
import io
import logging
import os
from pathlib import Path

import markdown
from fastapi import FastAPI, HTTPException, status
from fastapi.responses import HTMLResponse

from synth_files.errors import AgSynthError
from synth_files.example_format import example_of
from synth_files.grammar import used_holes
from synth_files.pipeline import run_pipeline
from synth_files.sketch_format import load_sketch
from synth_files.synth_states import (
    CheckRequest,
    CheckResponse,
    CheckResult,
    InputState,
    SynthesisBudget,
    SynthRequest,
    SynthResponse,
)
from synth_files.synthesis import check_examples
from synth_files.values import show_value

logger = logging.getLogger(__name__)

# Load README file for API documentation
md_file_loc = Path(__file__).resolve().parent.parent / "README_connect.md"
desc = md_file_loc.read_text(encoding="utf-8")

# Initialise FastAPI application with metadata
app = FastAPI(
    title="agsynth",
    summary="Synthesize the semantic actions of attribute grammar sketches from examples",
    description=desc,
    version="1.0.0",
)


def _unprocessable(e: Exception) -> HTTPException:
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))


# Router for synth with GET. Displays the connection readme as HTML
@app.get("/synth/", response_class=HTMLResponse)
async def return_readme():
    """Display API documentation from README file as HTML.

    Returns:
        HTMLResponse: Rendered HTML page with API usage documentation.
    """
    output_buffer = io.BytesIO()
    markdown.markdownFromFile(input=str(md_file_loc), output=output_buffer)
    html_body = output_buffer.getvalue().decode("utf-8")
    html_content = f"""
    <!DOCTYPE html>
    <html>
    <head>
        <title>agsynth README</title>
    </head>
    <body>
        {html_body}
    </body>
    </html>
    """
    return HTMLResponse(content=html_content)


# Router to synthesize a sketch's holes
@app.post("/synth/", response_model=SynthResponse)
def synth(data: SynthRequest):
    """Complete a sketch from examples.

    Args:
        data (SynthRequest): Sketch text, examples, algorithm and budget.

    Returns:
        SynthResponse: Run report and, on success, the completed grammar text.

    Raises:
        HTTPException: 422 if the sketch or an example is malformed, 500 if
            synthesis fails unexpectedly.
    """
    logger.info("synth request: %d examples, algo %s", len(data.examples), data.algo)
    try:
        state = InputState(
            sketch_text=data.sketch,
            examples=data.examples,
            algo=data.algo,
            budget=SynthesisBudget(max_size=data.dsl_size_max, max_candidates=data.max_candidates, seed=data.seed),
            tol=data.tol,
            seed=data.seed,
            validation_rounds=0,
        )
        out = run_pipeline(state)
    except (AgSynthError, ValueError) as e:
        raise _unprocessable(e)
    except Exception:
        logger.exception("synthesis failed")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Unable to Synthesize",
        )
    logger.info("synth response: %s, %d/%d passed", out.report.status, out.report.passed, out.report.total)
    completed = out.completed_text if out.report.status == "ok" else None
    return SynthResponse(report=out.report, completed=completed)


# Router to replay examples on a completed grammar
@app.post("/check/", response_model=CheckResponse)
def check(data: CheckRequest):
    """Replay examples on a hole-free grammar.

    Raises:
        HTTPException: 422 if the grammar has open holes or does not load.
    """
    try:
        g = load_sketch(data.sketch)
        open_holes = sorted(used_holes(g))
        if open_holes:
            raise ValueError(f"grammar has open holes: {', '.join(open_holes)}")
        results = check_examples(g, [example_of(r) for r in data.examples], data.tol)
    except (AgSynthError, ValueError) as e:
        raise _unprocessable(e)
    rows = [
        CheckResult(input=ex.input, ok=err is None, got=show_value(got) if got is not None else None, error=err)
        for ex, got, err in results
    ]
    passed = sum(1 for row in rows if row.ok)
    logger.info("check: %d/%d passed", passed, len(rows))
    return CheckResponse(passed=passed, total=len(rows), results=rows)


# Router to ping backend and display status
@app.get("/", response_class=HTMLResponse)
async def get_handler():
    """Health check endpoint to verify service status.

    Returns:
        HTMLResponse: HTML page displaying service status and environment.
    """
    return HTMLResponse(
        content=f"""
        <!DOCTYPE html>
        <html>
        <head>
            <title>agsynth</title>
        </head>
        <body>
            <h4>Synthesis Service is Running</h4>
            This is the <b>{os.getenv('AGSYNTH_ENV', 'local')}</b> environment
        </body>
        </html>
        """
    )
