"""
Harness MCP Tools

Monte-Carlo correctness runs and reproduction of the worked examples.
"""

import asyncio
import logging
from typing import Optional

from pydantic import Field

from bandit.algorithms import PacParams
from core.config import get_config
from core.response import success_response
from core.server import server
from core.utils import handle_tool_errors
from harness.harness import EXAMPLE_EPS0, ExperimentSpec, reproduce_examples, run_trials
from harness.results_io import report_payload
from rewards.instance_io import load_instance

logger = logging.getLogger(__name__)


@server.tool()
@handle_tool_errors("simulate_trials")
async def simulate_trials(
    instance: str = Field(..., description="Instance description: a JSON file path or inline JSON text."),
    algorithm: str = Field(..., description="One of 'max-cb', 'me' (Maximal Eliminator) or 'unified'."),
    eps: float = Field(..., description="Accuracy eps > 0."),
    delta: float = Field(..., description="Confidence delta in (0, 1)."),
    seed: int = Field(0, description="Master seed; per-trial seeds are derived from it."),
    trials: Optional[int] = Field(None, description="Number of trials. Defaults to MAXBANDIT_TRIALS (1000)."),
    workers: Optional[int] = Field(None, description="Worker processes. Defaults to MAXBANDIT_WORKERS (1)."),
    max_samples: Optional[int] = Field(None, description="Refuse unified-arm runs needing more draws. Defaults to MAXBANDIT_MAX_SAMPLES."),
) -> str:
    """
    Estimate P(V > mu* - eps) and the sample count T by repeated runs.

    Returns:
        str: JSON envelope with success rate, Wilson 95% interval, T statistics and the pass verdict.
    """
    config = get_config()
    spec = ExperimentSpec(
        instance=await asyncio.to_thread(load_instance, instance),
        pac=PacParams(eps=eps, delta=delta),
        algorithm=algorithm,
        trials=trials or config.default_trials,
        master_seed=seed,
        workers=workers or config.default_workers,
        max_samples=max_samples if max_samples is not None else config.max_samples,
    )
    logger.info(f"[simulate_trials] Invoked. algorithm={spec.algorithm}, trials={spec.trials}, seed={seed}")
    report = await asyncio.to_thread(run_trials, spec)
    return success_response(report_payload(report))


@server.tool()
@handle_tool_errors("reproduce_worked_examples")
async def reproduce_worked_examples(
    eps0: float = Field(EXAMPLE_EPS0, description="eps0 used for the start-up term and the multi-arm lower bound."),
) -> str:
    """
    Evaluate both 10^4-arm worked examples and compare with their published bound values.

    Returns:
        str: JSON envelope with one row per quantity, relative errors and the case verdicts.
    """
    logger.info(f"[reproduce_worked_examples] Invoked. eps0={eps0}")
    table = await asyncio.to_thread(reproduce_examples, eps0)
    return success_response(report_payload(table))
