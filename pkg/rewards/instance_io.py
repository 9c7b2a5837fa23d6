"""
JSON instance descriptions.

    {
      "tail": {"A": 1.0, "beta": 1.0, "eps0": 0.5},
      "arms": [
        {"type": "uniform", "lo": 0.0, "hi": 1.0},
        {"type": "power_tail", "mu_star": 0.5, "A": 2.0, "beta": 1.0},
        {"type": "point_mass", "mu_star": 0.3},
        {"type": "mixture", "components": [{"weight": 0.5, "arm": {...}}, ...]}
      ],
      "unchecked": false
    }

Unknown fields are rejected at every level.
"""

import json
import logging
import os
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from bandit.bandit_env import BanditInstance
from core.errors import InstanceFileError, MaxBanditError
from rewards.reward_models import (
    FiniteMixture,
    PerturbedTail,
    PointMass,
    PowerTail,
    RewardDistribution,
    TailParams,
    Uniform,
)

logger = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TailSpec(_Strict):
    A: float
    beta: float
    eps0: float


class PowerTailSpec(_Strict):
    type: Literal["power_tail"]
    mu_star: float
    A: float
    beta: float


class UniformSpec(_Strict):
    type: Literal["uniform"]
    lo: float
    hi: float


class PointMassSpec(_Strict):
    type: Literal["point_mass"]
    mu_star: float


class ComponentSpec(_Strict):
    weight: float = Field(ge=0.0, le=1.0)
    arm: "ArmSpec"


class MixtureSpec(_Strict):
    type: Literal["mixture"]
    components: List[ComponentSpec] = Field(min_length=1)


ArmSpec = Annotated[
    Union[PowerTailSpec, UniformSpec, PointMassSpec, MixtureSpec],
    Field(discriminator="type"),
]

ComponentSpec.model_rebuild()
MixtureSpec.model_rebuild()


class InstanceSpec(_Strict):
    tail: TailSpec
    arms: List[ArmSpec] = Field(min_length=1)
    unchecked: bool = False


def distribution_from_spec(spec) -> RewardDistribution:
    if isinstance(spec, PowerTailSpec):
        return PowerTail(mu_star=spec.mu_star, A=spec.A, beta=spec.beta)
    if isinstance(spec, UniformSpec):
        return Uniform(lo=spec.lo, hi=spec.hi)
    if isinstance(spec, PointMassSpec):
        return PointMass(mu_star=spec.mu_star)
    return FiniteMixture(
        components=tuple((c.weight, distribution_from_spec(c.arm)) for c in spec.components)
    )


def distribution_to_dict(dist: RewardDistribution) -> Dict[str, Any]:
    """Inverse of distribution_from_spec; PerturbedTail gets a descriptive (non-loadable) form."""
    if isinstance(dist, PowerTail):
        return {"type": "power_tail", "mu_star": dist.mu_star, "A": dist.A, "beta": dist.beta}
    if isinstance(dist, Uniform):
        return {"type": "uniform", "lo": dist.lo, "hi": dist.hi}
    if isinstance(dist, PointMass):
        return {"type": "point_mass", "mu_star": dist.mu_star}
    if isinstance(dist, FiniteMixture):
        return {
            "type": "mixture",
            "components": [{"weight": w, "arm": distribution_to_dict(d)} for w, d in dist.components],
        }
    if isinstance(dist, PerturbedTail):
        return {
            "type": "perturbed_tail",
            "base": distribution_to_dict(dist.base),
            "lower_weight": dist.lower_weight,
            "split": dist.split,
            "atom_weight": dist.atom_weight,
            "tail_A": dist.tail_A,
            "tail_beta": dist.tail_beta,
            "tail_start": dist.tail_start,
            "tail_end": dist.tail_end,
        }
    raise InstanceFileError(f"cannot serialize {type(dist).__name__}")


def instance_to_dict(instance: BanditInstance) -> Dict[str, Any]:
    return {
        "tail": {"A": instance.tail.A, "beta": instance.tail.beta, "eps0": instance.tail.eps0},
        "arms": [distribution_to_dict(arm) for arm in instance.arms],
        "unchecked": instance.unchecked,
    }


def parse_instance(
    payload: Dict[str, Any], source: str = "<inline>", unchecked: Optional[bool] = None
) -> BanditInstance:
    """
    Build a BanditInstance from an already decoded JSON object.

    unchecked, when given, overrides the file's own "unchecked" flag.

    Raises:
        InstanceFileError: Schema violations, including unknown fields.
        ParameterError / AssumptionViolationError: Valid schema, invalid values.
    """
    try:
        spec = InstanceSpec.model_validate(payload)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise InstanceFileError(problems, source) from e

    tail = TailParams(A=spec.tail.A, beta=spec.tail.beta, eps0=spec.tail.eps0)
    arms = [distribution_from_spec(arm) for arm in spec.arms]
    logger.debug(f"Parsed {len(arms)} arms from {source}")
    skip_checks = spec.unchecked if unchecked is None else unchecked
    return BanditInstance(arms=tuple(arms), tail=tail, unchecked=skip_checks)


def load_instance(path_or_json: str, unchecked: Optional[bool] = None) -> BanditInstance:
    """
    Load an instance from a file path, or from inline JSON text when the argument
    starts with '{' (the MCP tools accept both).
    """
    text = path_or_json.strip()
    if text.startswith("{"):
        source = "<inline>"
    else:
        source = path_or_json
        if not os.path.isfile(path_or_json):
            raise InstanceFileError("file not found", path_or_json)
        try:
            with open(path_or_json, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise InstanceFileError(str(e), path_or_json) from e

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFileError(f"invalid JSON: {e}", source) from e
    if not isinstance(payload, dict):
        raise InstanceFileError("top level must be a JSON object", source)

    try:
        return parse_instance(payload, source, unchecked)
    except MaxBanditError as e:
        logger.info(f"Instance {source} rejected: {e.description}")
        raise
