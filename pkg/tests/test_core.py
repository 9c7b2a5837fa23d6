import asyncio
import json
import logging
import os

import pytest
from mcp.server.fastmcp.exceptions import ToolError

from core.config import get_config, reload_config
from core.errors import EXIT_FAILED_VERDICT, AssumptionViolationError, ParameterError, PhaseLimitError
from core.response import error_response, success_response
from core.utils import ensure_output_directory, handle_tool_errors


@pytest.fixture(autouse=True)
def fresh_config():
    yield
    reload_config()


class TestConfig:
    def test_defaults(self, monkeypatch):
        for name in ("MAXBANDIT_LOG", "MAXBANDIT_TRIALS", "MAXBANDIT_WORKERS", "MAXBANDIT_MAX_SAMPLES"):
            monkeypatch.delenv(name, raising=False)
        config = reload_config()
        assert config.default_trials == 1000
        assert config.default_workers == 1
        assert config.max_samples == 10**9
        assert config.effective_log_level() == logging.WARNING

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("MAXBANDIT_MAX_SAMPLES", "1e6")
        monkeypatch.setenv("MAXBANDIT_WORKERS", "0")
        monkeypatch.setenv("MAXBANDIT_LOG", "debug")
        config = reload_config()
        assert config.max_samples == 1_000_000
        assert config.default_workers == 1
        assert config.effective_log_level() == logging.DEBUG
        assert get_config() is config

    def test_bad_values_fall_back(self, monkeypatch):
        monkeypatch.setenv("MAXBANDIT_TRIALS", "many")
        monkeypatch.setenv("MAXBANDIT_LOG", "loud")
        config = reload_config()
        assert config.default_trials == 1000
        assert config.log_level is None
        assert config.get_environment_summary()["MAXBANDIT_LOG"] == "default"


class TestResponses:
    def test_success(self):
        assert json.loads(success_response({"x": 1})) == {"success": True, "data": {"x": 1}}

    def test_error(self):
        payload = json.loads(error_response("invalid_parameter", "bad eps"))
        assert payload["error"] == {"code": "invalid_parameter", "message": "bad eps", "exit_code": 2}


class TestErrors:
    def test_parameter_error_names_field(self):
        error = ParameterError("must be > 0", "eps")
        assert error.description == "Invalid eps: must be > 0"
        assert isinstance(error, ValueError)

    def test_assumption_violation_is_one_based(self):
        error = AssumptionViolationError(0, 0.1, 0.05, 0.1)
        assert "arm 1" in error.description

    def test_phase_limit_exit_code(self):
        assert PhaseLimitError(64, 1.0, 0.1).exit_code == EXIT_FAILED_VERDICT


class TestHandleToolErrors:
    def test_passes_result_through(self):
        @handle_tool_errors("demo")
        async def ok():
            return "fine"

        assert asyncio.run(ok()) == "fine"

    def test_domain_error_becomes_tool_error(self):
        @handle_tool_errors("demo")
        async def broken(eps=0.0):
            raise ParameterError("must be > 0", "eps")

        with pytest.raises(ToolError, match=r"demo failed \(invalid_parameter\)"):
            asyncio.run(broken(eps=0.0))

    def test_unexpected_error_is_wrapped(self):
        @handle_tool_errors("demo")
        async def broken():
            raise KeyError("x")

        with pytest.raises(Exception, match="unexpected error occurred in demo"):
            asyncio.run(broken())


def test_ensure_output_directory_creates_parents(tmp_path):
    target = ensure_output_directory(str(tmp_path / "a" / "b" / "report.json"))
    assert os.path.isdir(os.path.dirname(target))
    assert not os.path.exists(os.path.join(os.path.dirname(target), ".maxbandit_write_test"))
