import logging
from importlib import metadata

from starlette.requests import Request
from starlette.responses import JSONResponse

from fastmcp import FastMCP

from core.config import get_config

logger = logging.getLogger(__name__)

_transport_mode = "stdio"

server = FastMCP(name="maxbandit")


def set_transport_mode(mode: str):
    """Sets the transport mode for the server."""
    global _transport_mode
    _transport_mode = mode
    logger.info(f"🔌 Transport: {mode}")


def get_transport_mode() -> str:
    """Gets the transport mode the server was started with."""
    return _transport_mode


def package_version() -> str:
    try:
        return metadata.version("maxbandit")
    except metadata.PackageNotFoundError:
        return "dev"


@server.custom_route("/health", methods=["GET"])
async def health_check(request: Request):
    return JSONResponse({
        "status": "healthy",
        "service": "maxbandit",
        "version": package_version(),
        "transport": get_transport_mode(),
        "config": get_config().get_environment_summary(),
    })
