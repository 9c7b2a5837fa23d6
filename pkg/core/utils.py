import functools
import logging
import os

from mcp.server.fastmcp.exceptions import ToolError

from core.errors import MaxBanditError, ResultsWriteError

logger = logging.getLogger(__name__)


def ensure_output_directory(path: str) -> str:
    """
    Make sure the directory that will hold `path` exists and is writable.

    Args:
        path: Destination file path for a report.

    Returns:
        The absolute path of the destination file.

    Raises:
        ResultsWriteError: If the directory cannot be created or written to.
    """
    target = os.path.abspath(path)
    directory = os.path.dirname(target) or "."
    try:
        os.makedirs(directory, exist_ok=True)
        marker = os.path.join(directory, ".maxbandit_write_test")
        with open(marker, "w") as f:
            f.write("test")
        os.remove(marker)
    except (PermissionError, OSError) as e:
        raise ResultsWriteError(target, f"output directory '{directory}' is not writable: {e}") from e
    logger.debug(f"Output directory check passed: {directory}")
    return target


def handle_tool_errors(tool_name: str):
    """
    A decorator to handle maxbandit errors in MCP tools in a standardized way.

    Domain errors become a ToolError carrying their description; anything else is
    logged with the tool parameters and re-raised with a generic message.

    Args:
        tool_name (str): The name of the tool being decorated (e.g., 'evaluate_bounds').
    """

    def decorator(func):
        @functools.wraps(func)
        async def wrapper(*args, **kwargs):
            try:
                return await func(*args, **kwargs)
            except MaxBanditError as error:
                logger.error(
                    f"{error.error_code} in {tool_name}: {error.description}\n"
                    f"  Tool params: {kwargs}"
                )
                raise ToolError(f"{tool_name} failed ({error.error_code}): {error.description}")
            except ToolError:
                raise
            except Exception as e:
                message = f"An unexpected error occurred in {tool_name}: {e}"
                logger.exception(f"{message}\n  Tool params: {kwargs}")
                raise Exception(message) from e

        return wrapper

    return decorator
