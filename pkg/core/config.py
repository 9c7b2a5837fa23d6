"""
Runtime configuration for maxbandit.

Values come from the environment (optionally populated from a .env file by main.py)
so the CLI and the MCP server share one source of defaults.
"""

import logging
import os
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

_VALID_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        # Accept scientific notation such as 1e9 for sample budgets
        return int(float(raw))
    except ValueError:
        logger.warning(f"Ignoring non-numeric {name}={raw!r}; using {default}")
        return default


class HarnessConfig:
    """
    Environment-backed defaults for simulations, logging and the server transport.
    """

    def __init__(self):
        level = os.getenv("MAXBANDIT_LOG", "").strip().upper()
        self.log_level: Optional[str] = level if level in _VALID_LOG_LEVELS else None
        if level and self.log_level is None:
            logger.warning(f"Unknown MAXBANDIT_LOG level {level!r}; falling back to defaults")
        self.log_file: Optional[str] = os.getenv("MAXBANDIT_LOG_FILE") or None

        self.max_samples = _int_env("MAXBANDIT_MAX_SAMPLES", 10**9)
        self.default_trials = _int_env("MAXBANDIT_TRIALS", 1000)
        self.default_workers = max(1, _int_env("MAXBANDIT_WORKERS", 1))

        self.base_uri = os.getenv("MAXBANDIT_BASE_URI", "http://localhost")
        self.port = _int_env("MAXBANDIT_PORT", 8000)

    def effective_log_level(self, default: str = "WARNING") -> int:
        """Numeric log level, honouring MAXBANDIT_LOG when it is set."""
        return getattr(logging, self.log_level or default)

    def get_environment_summary(self) -> Dict[str, Any]:
        """Effective configuration, for start-up banners and the health route."""
        return {
            "MAXBANDIT_LOG": self.log_level or "default",
            "MAXBANDIT_LOG_FILE": self.log_file or "Not Set",
            "MAXBANDIT_MAX_SAMPLES": self.max_samples,
            "MAXBANDIT_TRIALS": self.default_trials,
            "MAXBANDIT_WORKERS": self.default_workers,
            "MAXBANDIT_BASE_URI": self.base_uri,
            "MAXBANDIT_PORT": self.port,
        }


_config: Optional[HarnessConfig] = None


def get_config() -> HarnessConfig:
    """
    Get the global configuration instance.

    Returns:
        The lazily created HarnessConfig
    """
    global _config
    if _config is None:
        _config = HarnessConfig()
    return _config


def reload_config() -> HarnessConfig:
    """
    Re-read the environment (used after load_dotenv and by tests).

    Returns:
        The new HarnessConfig instance
    """
    global _config
    _config = HarnessConfig()
    return _config
