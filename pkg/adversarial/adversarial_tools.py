"""
Adversarial construction MCP Tools
"""

import asyncio
import logging

from pydantic import Field

from adversarial.adversarial_instances import build_adversarial_report as build_report
from bandit.algorithms import PacParams
from core.response import success_response
from core.server import server
from core.utils import handle_tool_errors
from rewards.instance_io import load_instance

logger = logging.getLogger(__name__)


@server.tool()
@handle_tool_errors("build_adversarial_report")
async def build_adversarial_report(
    instance: str = Field(..., description="Instance description: a JSON file path or inline JSON text. Arms must be power_tail, uniform or point_mass."),
    eps: float = Field(..., description="Accuracy eps, strictly between 0 and eps0."),
    delta: float = Field(..., description="Confidence delta, below 3/16 so that every threshold is positive."),
) -> str:
    """
    Build the perturbed instance for every arm and for the unified arm, and verify each one.

    Returns:
        str: JSON envelope with per-arm gamma coefficients, thresholds t_k and check results.
    """
    logger.info(f"[build_adversarial_report] Invoked. eps={eps}, delta={delta}")
    pac = PacParams(eps=eps, delta=delta)
    loaded = await asyncio.to_thread(load_instance, instance)
    report = await asyncio.to_thread(build_report, loaded, pac)
    return success_response(report)
