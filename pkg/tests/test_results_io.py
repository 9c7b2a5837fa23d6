import csv
import json

import pytest

from bounds.bounds import case_comparison, evaluate_bounds
from core.errors import ParameterError, ResultsWriteError
from harness.harness import ExamplesTable, ExperimentSpec, run_trials
from harness.results_io import (
    ARM_COLUMNS,
    EXAMPLE_COLUMNS,
    SCHEMA_VERSION,
    dumps,
    emit_results,
    report_payload,
)


@pytest.fixture
def correctness_report(point_mass_instance, desk_pac):
    return run_trials(ExperimentSpec(point_mass_instance, desk_pac, "unified", trials=5, master_seed=2))


def test_json_payload_tags(correctness_report):
    payload = json.loads(dumps(correctness_report))
    assert payload["schema_version"] == SCHEMA_VERSION
    assert payload["kind"] == "correctness"
    assert payload["trials"] == 5
    assert "outcomes" not in payload


def test_json_without_timing_is_stable(correctness_report):
    a = dumps(correctness_report, include_timing=False)
    assert "wall_clock" not in json.loads(a)
    assert a == dumps(correctness_report, include_timing=False)
    assert a.endswith("\n")


def test_dict_reports_keep_kind():
    payload = report_payload({"kind": "adversarial", "passed": True})
    assert payload == {"schema_version": SCHEMA_VERSION, "kind": "adversarial", "passed": True}


def test_unknown_report_type():
    with pytest.raises(ParameterError):
        report_payload(object())


def test_json_file(tmp_path, three_uniform_instance, desk_pac):
    path = tmp_path / "nested" / "bounds.json"
    report = case_comparison(three_uniform_instance, desk_pac)
    emit_results(report, "json", str(path))
    payload = json.loads(path.read_text())
    assert payload == report_payload(report)
    assert payload["kind"] == "case_comparison"
    assert len(payload["bounds"]["arms"]) == 3


def test_bounds_csv(tmp_path, three_uniform_instance, desk_pac):
    path = tmp_path / "bounds.csv"
    emit_results(case_comparison(three_uniform_instance, desk_pac), "csv", str(path))
    lines = path.read_text().splitlines()
    scalars = [line for line in lines if line.startswith("# ")]
    assert "# K,3" in scalars
    assert any(line.startswith("# verdict,") for line in scalars)
    table = list(csv.reader(line for line in lines if not line.startswith("# ")))
    assert table[0] == ARM_COLUMNS
    assert [row[0] for row in table[1:]] == ["1", "2", "3"]


def test_trial_csv(tmp_path, correctness_report):
    path = tmp_path / "trials.csv"
    emit_results(correctness_report, "CSV", str(path))
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert len(rows) == 6
    assert rows[1][4] == "true"


def test_empty_examples_table(tmp_path):
    path = tmp_path / "examples.csv"
    emit_results(ExamplesTable(rows=[]), "csv", str(path))
    assert path.read_text() == ",".join(EXAMPLE_COLUMNS) + "\n"


def test_unknown_format(tmp_path, three_uniform_instance, desk_pac):
    with pytest.raises(ParameterError):
        emit_results(evaluate_bounds(three_uniform_instance, desk_pac), "xml", str(tmp_path / "x"))


def test_dict_has_no_csv_layout(tmp_path):
    with pytest.raises(ParameterError):
        emit_results({"kind": "adversarial"}, "csv", str(tmp_path / "x.csv"))


def test_unwritable_destination(tmp_path, three_uniform_instance, desk_pac):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ResultsWriteError):
        emit_results(evaluate_bounds(three_uniform_instance, desk_pac), "json", str(blocker / "out.json"))
