"""
Deterministic CSV / JSON serialization of reports.

CSV layouts:
    per-trial rows      trial,seed,V,T,success
    bound report        '# name,value' scalar lines, then arm_index,mu_star_k,gap,theta1,theta2
    examples table      example,quantity,computed,published,relative_error,within_tolerance
"""

import csv
import json
import logging
from typing import Any, Dict, Iterable, List

from bounds.bounds import BoundReport, CaseVerdict
from core.errors import ParameterError, ResultsWriteError
from core.utils import ensure_output_directory
from harness.harness import CorrectnessReport, ExamplesTable, TrialOutcome

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

TRIAL_COLUMNS = ["trial", "seed", "V", "T", "success"]
ARM_COLUMNS = ["arm_index", "mu_star_k", "gap", "theta1", "theta2"]
EXAMPLE_COLUMNS = ["example", "quantity", "computed", "published", "relative_error", "within_tolerance"]


def _csv_value(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def report_payload(report: Any, include_timing: bool = True) -> Dict[str, Any]:
    """JSON-ready dict with a kind tag and schema version."""
    if isinstance(report, CorrectnessReport):
        kind, body = "correctness", report.to_dict(include_timing)
    elif isinstance(report, BoundReport):
        kind, body = "bounds", report.to_dict()
    elif isinstance(report, CaseVerdict):
        kind, body = "case_comparison", report.to_dict()
    elif isinstance(report, ExamplesTable):
        kind, body = "examples", report.to_dict()
    elif isinstance(report, dict):
        kind, body = report.get("kind", "report"), {k: v for k, v in report.items() if k != "kind"}
    else:
        raise ParameterError(f"cannot serialize {type(report).__name__}", "report")
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **body}


def dumps(report: Any, include_timing: bool = True) -> str:
    return json.dumps(report_payload(report, include_timing), indent=2, sort_keys=True) + "\n"


def _write_text(path: str, text: str):
    target = ensure_output_directory(path)
    try:
        with open(target, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise ResultsWriteError(path, str(e)) from e


def _write_rows(path: str, header: List[str], rows: Iterable[List[Any]], preamble: Iterable[str] = ()):
    target = ensure_output_directory(path)
    try:
        with open(target, "w", encoding="utf-8", newline="") as f:
            for line in preamble:
                f.write(line + "\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_csv_value(v) for v in row])
    except OSError as e:
        raise ResultsWriteError(path, str(e)) from e


def write_trial_rows(outcomes: List[TrialOutcome], path: str):
    _write_rows(
        path,
        TRIAL_COLUMNS,
        ([o.trial, o.seed, o.value, o.total_samples, o.success] for o in outcomes),
    )
    logger.debug(f"Wrote {len(outcomes)} trial rows to {path}")


def emit_results(report: Any, fmt: str, path: str):
    """
    Write a report to path as 'json' or 'csv'.

    Raises:
        ParameterError: Unknown format, or CSV requested for a report without a CSV layout.
        ResultsWriteError: The file could not be written.
    """
    fmt = fmt.lower()
    if fmt == "json":
        _write_text(path, dumps(report))
    elif fmt != "csv":
        raise ParameterError(f"must be 'csv' or 'json', got {fmt!r}", "format")
    elif isinstance(report, CorrectnessReport):
        write_trial_rows(report.outcomes, path)
    elif isinstance(report, (BoundReport, CaseVerdict)):
        bounds = report.report if isinstance(report, CaseVerdict) else report
        preamble = [f"# {name},{_csv_value(value)}" for name, value in bounds.scalars().items()]
        if isinstance(report, CaseVerdict):
            preamble.append(f"# verdict,{report.verdict}")
        preamble += [f"# warning,{note}" for note in bounds.warnings]
        _write_rows(
            path,
            ARM_COLUMNS,
            ([r[c] for c in ARM_COLUMNS] for r in bounds.arm_rows()),
            preamble,
        )
    elif isinstance(report, ExamplesTable):
        _write_rows(
            path,
            EXAMPLE_COLUMNS,
            ([getattr(r, c) for c in EXAMPLE_COLUMNS] for r in report.rows),
        )
    else:
        raise ParameterError(f"no CSV layout for {type(report).__name__}", "format")
    logger.info(f"Wrote {fmt} report to {path}")
