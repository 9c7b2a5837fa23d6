"""
Reward model MCP Tools

Tail-assumption checks for instance descriptions.
"""

import asyncio
import logging

from pydantic import Field

from core.response import success_response
from core.server import server
from core.utils import handle_tool_errors
from rewards.instance_io import load_instance
from rewards.reward_models import check_assumption1

logger = logging.getLogger(__name__)


def verify_instance_arms(instance_source: str, grid: int = 64) -> dict:
    """Tail check for every arm, reporting failures instead of rejecting the instance."""
    instance = load_instance(instance_source, unchecked=True)
    arms = []
    for index, arm in enumerate(instance.arms):
        check = check_assumption1(arm, instance.tail, grid)
        arms.append({"arm_index": index + 1, **check.to_dict()})
    return {
        "tail": {"A": instance.tail.A, "beta": instance.tail.beta, "eps0": instance.tail.eps0},
        "grid_size": grid,
        "arms": arms,
        "passed": all(a["passed"] for a in arms),
    }


@server.tool()
@handle_tool_errors("verify_assumption")
async def verify_assumption(
    instance: str = Field(..., description="Instance description: a JSON file path or inline JSON text with 'tail' and 'arms'. Set \"unchecked\": true to inspect arms that would fail construction."),
    grid: int = Field(64, description="Number of geometric grid points in (0, eps0]. Must be at least 2."),
) -> str:
    """
    Check P(X > mu*_k - eps) >= A eps^beta for every arm on a geometric grid.

    Returns:
        str: JSON envelope with per-arm pass/fail and the first violating eps.
    """
    logger.info(f"[verify_assumption] Invoked. grid={grid}")
    data = await asyncio.to_thread(verify_instance_arms, instance, grid)
    logger.info(f"[verify_assumption] {len(data['arms'])} arms, passed={data['passed']}")
    return success_response(data)
