"""
Bounds MCP Tools

Closed-form sample-complexity bounds and the multi-arm vs unified-arm comparison.
"""

import asyncio
import logging
from typing import Optional

from pydantic import Field

from bandit.algorithms import PacParams
from bandit.bandit_env import BanditInstance
from bounds.bounds import case_comparison, evaluate_bounds
from core.response import success_response
from core.server import server
from core.utils import handle_tool_errors
from rewards.instance_io import load_instance

logger = logging.getLogger(__name__)


def load_for_bounds(instance_source: str, eps0_override: Optional[float] = None) -> BanditInstance:
    instance = load_instance(instance_source)
    if eps0_override is not None:
        instance = instance.with_tail(instance.tail.with_eps0(eps0_override))
    return instance


@server.tool(name="evaluate_bounds")
@handle_tool_errors("evaluate_bounds")
async def evaluate_bounds_tool(
    instance: str = Field(..., description="Instance description: a JSON file path or inline JSON text."),
    eps: float = Field(..., description="Accuracy eps > 0."),
    delta: float = Field(..., description="Confidence delta in (0, 1)."),
    eps0_override: Optional[float] = Field(None, description="Replace the instance's eps0 before evaluating."),
    clamp_L: bool = Field(True, description="Lift L to 10 when the formula yields less."),
) -> str:
    """
    Evaluate the multi-arm lower/upper bounds, the unified-arm bounds and the per-arm theta terms.

    Returns:
        str: JSON envelope with the bound report, including precondition warnings.
    """
    logger.info(f"[evaluate_bounds] Invoked. eps={eps}, delta={delta}, eps0_override={eps0_override}")
    pac = PacParams(eps=eps, delta=delta)
    loaded = await asyncio.to_thread(load_for_bounds, instance, eps0_override)
    report = await asyncio.to_thread(evaluate_bounds, loaded, pac, clamp_L)
    return success_response(report.to_dict())


@server.tool()
@handle_tool_errors("compare_cases")
async def compare_cases(
    instance: str = Field(..., description="Instance description: a JSON file path or inline JSON text."),
    eps: float = Field(..., description="Accuracy eps > 0."),
    delta: float = Field(..., description="Confidence delta in (0, 1)."),
    eps0_override: Optional[float] = Field(None, description="Replace the instance's eps0 before evaluating."),
) -> str:
    """
    Decide whether the bounds favour searching arm by arm or sampling the unified arm.

    Returns:
        str: JSON envelope with verdict 'multi_arm', 'unified', 'inconclusive' or 'not_applicable'.
    """
    logger.info(f"[compare_cases] Invoked. eps={eps}, delta={delta}")
    pac = PacParams(eps=eps, delta=delta)
    loaded = await asyncio.to_thread(load_for_bounds, instance, eps0_override)
    verdict = await asyncio.to_thread(case_comparison, loaded, pac)
    logger.info(f"[compare_cases] verdict={verdict.verdict}")
    return success_response(verdict.to_dict())
