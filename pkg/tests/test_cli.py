import json

import pytest

from main import main


@pytest.fixture
def uniform_path(instance_file, three_uniform_payload):
    return instance_file(three_uniform_payload)


@pytest.fixture
def near_pair_path(instance_file):
    return instance_file(
        {
            "tail": {"A": 1.0, "beta": 1.0, "eps0": 0.25},
            "arms": [{"type": "point_mass", "mu_star": 1.0}, {"type": "point_mass", "mu_star": 0.9}],
        },
        name="near_pair.json",
    )


def test_bounds(uniform_path, capsys):
    assert main(["bounds", "--instance", uniform_path, "--eps", "0.05", "--delta", "0.1"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["kind"] == "case_comparison"
    assert payload["verdict"] in {"multi_arm", "unified", "inconclusive"}


def test_bounds_csv_out(uniform_path, tmp_path, capsys):
    out = tmp_path / "bounds.csv"
    argv = ["bounds", "--instance", uniform_path, "--eps", "0.05", "--delta", "0.1", "--out", str(out), "--format", "csv"]
    assert main(argv) == 0
    assert "arm_index,mu_star_k,gap,theta1,theta2" in out.read_text()


def test_bounds_eps0_override(uniform_path, capsys):
    argv = ["bounds", "--instance", uniform_path, "--eps", "0.05", "--delta", "0.1", "--eps0-override", "0.25"]
    assert main(argv) == 0
    assert json.loads(capsys.readouterr().out)["bounds"]["eps0"] == 0.25


def test_simulate_writes_trial_csv(uniform_path, tmp_path, capsys):
    out = tmp_path / "trials.csv"
    argv = [
        "simulate", "--instance", uniform_path, "--alg", "unified", "--eps", "0.05", "--delta", "0.1",
        "--trials", "30", "--seed", "5", "--out", str(out), "--format", "csv",
    ]
    assert main(argv) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"]
    assert len(out.read_text().splitlines()) == 31


def test_simulate_budget_refusal(uniform_path, capsys):
    argv = [
        "simulate", "--instance", uniform_path, "--alg", "unified", "--eps", "0.05", "--delta", "0.1",
        "--trials", "3", "--seed", "0", "--max-samples", "10",
    ]
    assert main(argv) == 2
    lines = capsys.readouterr().err.splitlines()
    error = json.loads(next(line for line in lines if line.startswith('{"success"')))
    assert error["error"]["code"] == "sample_budget_exceeded"
    assert "140" in error["error"]["message"]


def test_examples(capsys):
    assert main(["examples"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"]


def test_verify_assumption_failure(instance_file, three_uniform_payload, capsys):
    three_uniform_payload["arms"].append({"type": "uniform", "lo": 0.0, "hi": 5.0})
    path = instance_file(three_uniform_payload)
    assert main(["verify-assumption", "--instance", path]) == 1
    payload = json.loads(capsys.readouterr().out)
    assert [arm["passed"] for arm in payload["arms"]] == [True, True, True, False]


def test_adversarial(near_pair_path, capsys):
    assert main(["adversarial", "--instance", near_pair_path, "--eps", "0.1", "--delta", "0.01"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["kind"] == "adversarial"
    assert payload["passed"]


def test_adversarial_precondition(uniform_path, capsys):
    assert main(["adversarial", "--instance", uniform_path, "--eps", "0.05", "--delta", "0.1"]) == 2
    assert "precondition_failed" in capsys.readouterr().err


def test_missing_instance(tmp_path, capsys):
    argv = ["bounds", "--instance", str(tmp_path / "none.json"), "--eps", "0.05", "--delta", "0.1"]
    assert main(argv) == 2
    assert "invalid_instance" in capsys.readouterr().err


def test_invalid_delta(uniform_path, capsys):
    assert main(["bounds", "--instance", uniform_path, "--eps", "0.05", "--delta", "1.5"]) == 2


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--alg", "thompson"])
    assert info.value.code == 2


def test_simulate_invalid_eliminator_delta(instance_file, capsys):
    path = instance_file({"tail": {"A": 1.0, "beta": 1.0, "eps0": 0.5}, "arms": [{"type": "point_mass", "mu_star": 1.0}]})
    argv = ["simulate", "--instance", path, "--alg", "me", "--eps", "0.25", "--delta", "0.99", "--trials", "3", "--seed", "0"]
    assert main(argv) == 2
    assert "invalid_parameter" in capsys.readouterr().err
