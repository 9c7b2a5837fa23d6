import json

import pytest

from core.errors import AssumptionViolationError, InstanceFileError, ParameterError
from rewards.instance_io import instance_to_dict, load_instance, parse_instance
from rewards.reward_models import FiniteMixture, PointMass, PowerTail, Uniform


def test_load_from_file(instance_file, three_uniform_payload):
    instance = load_instance(instance_file(three_uniform_payload))
    assert instance.size == 3
    assert instance.arms[0] == Uniform(0.0, 1.0)
    assert instance.tail.eps0 == 0.5


def test_load_inline_json(three_uniform_payload):
    instance = load_instance(json.dumps(three_uniform_payload))
    assert instance.mu_star() == 1.0


def test_all_variants():
    payload = {
        "tail": {"A": 1.0, "beta": 1.0, "eps0": 0.5},
        "arms": [
            {"type": "power_tail", "mu_star": 0.5, "A": 2.0, "beta": 1.0},
            {"type": "point_mass", "mu_star": 0.3},
            {
                "type": "mixture",
                "components": [
                    {"weight": 0.5, "arm": {"type": "point_mass", "mu_star": 0.1}},
                    {"weight": 0.5, "arm": {"type": "uniform", "lo": 0.0, "hi": 0.2}},
                ],
            },
        ],
    }
    instance = parse_instance(payload)
    assert instance.arms[0] == PowerTail(0.5, 2.0, 1.0)
    assert instance.arms[1] == PointMass(0.3)
    assert isinstance(instance.arms[2], FiniteMixture)
    assert instance.arms[2].max_reward() == 0.2


def test_nested_mixture():
    inner = {
        "type": "mixture",
        "components": [
            {"weight": 1.0, "arm": {"type": "point_mass", "mu_star": 0.4}},
        ],
    }
    payload = {
        "tail": {"A": 1.0, "beta": 1.0, "eps0": 0.5},
        "arms": [{"type": "mixture", "components": [{"weight": 1.0, "arm": inner}]}],
    }
    assert parse_instance(payload).mu_star() == 0.4


@pytest.mark.parametrize(
    "mutate",
    [
        lambda p: p.update(extra=1),
        lambda p: p["tail"].update(gamma=2.0),
        lambda p: p["arms"][0].update(width=1.0),
        lambda p: p["arms"].append({"type": "gaussian", "mu": 0.0}),
        lambda p: p.update(arms=[]),
        lambda p: p.pop("tail"),
    ],
    ids=["top_level", "tail", "arm", "unknown_type", "no_arms", "missing_tail"],
)
def test_schema_violations(three_uniform_payload, mutate):
    mutate(three_uniform_payload)
    with pytest.raises(InstanceFileError):
        parse_instance(three_uniform_payload)


def test_invalid_values_are_parameter_errors(three_uniform_payload):
    three_uniform_payload["arms"][0] = {"type": "uniform", "lo": 1.0, "hi": 0.0}
    with pytest.raises(ParameterError):
        parse_instance(three_uniform_payload)


def test_assumption_checked_on_load(three_uniform_payload):
    three_uniform_payload["arms"][2] = {"type": "uniform", "lo": 0.0, "hi": 5.0}
    with pytest.raises(AssumptionViolationError) as info:
        parse_instance(three_uniform_payload)
    assert info.value.arm_index == 2


def test_unchecked_flag_in_file(three_uniform_payload):
    three_uniform_payload["arms"][2] = {"type": "uniform", "lo": 0.0, "hi": 5.0}
    three_uniform_payload["unchecked"] = True
    assert parse_instance(three_uniform_payload).unchecked


def test_unchecked_argument_overrides_file(three_uniform_payload):
    three_uniform_payload["arms"][2] = {"type": "uniform", "lo": 0.0, "hi": 5.0}
    assert load_instance(json.dumps(three_uniform_payload), unchecked=True).size == 3


def test_missing_file(tmp_path):
    with pytest.raises(InstanceFileError, match="file not found"):
        load_instance(str(tmp_path / "absent.json"))


def test_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(InstanceFileError, match="invalid JSON"):
        load_instance(str(path))


def test_top_level_must_be_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")
    with pytest.raises(InstanceFileError, match="JSON object"):
        load_instance(str(path))


def test_instance_to_dict_reloads(three_uniform_payload):
    instance = parse_instance(three_uniform_payload)
    again = parse_instance(instance_to_dict(instance))
    assert again == instance
