"""
JSON envelopes shared by the MCP tools and the CLI's error output.

Tool results are {"success": true, "data": ...}; failures carry the MaxBanditError
code, its description and the exit status the CLI would return for it.
"""

import json
from typing import Any


def success_response(data: Any) -> str:
    """Envelope for a finished tool call. Keys are sorted so reports diff cleanly."""
    return json.dumps({"success": True, "data": data}, default=str, sort_keys=True)


def error_response(code: str, message: str, exit_code: int = 2) -> str:
    """
    Envelope for a failed call.

    Args:
        code: MaxBanditError.error_code, e.g. "invalid_parameter".
        message: The error's description.
        exit_code: 1 for a failed verdict, 2 for invalid input or a refused run.
    """
    return json.dumps({
        "success": False,
        "error": {"code": code, "message": message, "exit_code": exit_code},
    })
