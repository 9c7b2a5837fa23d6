"""
Bandit instances, per-arm accounting and the unified-arm reduction.

Arm indices are 0-based here; reports add 1.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import AssumptionViolationError, ParameterError
from rewards.reward_models import (
    FiniteMixture,
    RewardDistribution,
    TailParams,
    check_assumption1,
)

logger = logging.getLogger(__name__)

# Grid used for the construction-time tail check
CONSTRUCTION_GRID = 64

# Upper bound on values drawn in one vectorized call
SAMPLE_CHUNK = 1 << 20


@dataclass(frozen=True)
class BanditInstance:
    """Ordered arms sharing one set of tail constants."""

    arms: Tuple[RewardDistribution, ...]
    tail: TailParams
    unchecked: bool = False

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if not self.arms:
            raise ParameterError("an instance needs at least one arm", "arms")
        if self.unchecked:
            logger.debug(f"Instance with {len(self.arms)} arms built without tail checks")
            return
        for index, arm in enumerate(self.arms):
            check = check_assumption1(arm, self.tail, CONSTRUCTION_GRID)
            if not check.passed:
                raise AssumptionViolationError(index, check.violation_eps, check.tail_mass, check.required)

    @property
    def size(self) -> int:
        return len(self.arms)

    def max_rewards(self) -> np.ndarray:
        return np.array([arm.max_reward() for arm in self.arms], dtype=float)

    def mu_star(self) -> float:
        return max(arm.max_reward() for arm in self.arms)

    def optimal_arm(self) -> int:
        """Lowest index among the arms attaining mu_star."""
        return int(np.argmax(self.max_rewards()))

    def gap(self, k: int) -> float:
        return self.mu_star() - self.arms[k].max_reward()

    def with_tail(self, tail: TailParams) -> "BanditInstance":
        return BanditInstance(arms=self.arms, tail=tail, unchecked=self.unchecked)


@dataclass
class ArmStats:
    """C(k) and V^k for one arm; best stays None until the first draw."""

    count: int = 0
    best: Optional[float] = None

    def record(self, reward: float):
        self.count += 1
        if self.best is None or reward > self.best:
            self.best = reward

    def record_batch(self, rewards: np.ndarray):
        if len(rewards) == 0:
            return
        self.count += int(len(rewards))
        top = float(np.max(rewards))
        if self.best is None or top > self.best:
            self.best = top

    def to_dict(self) -> Dict[str, Any]:
        return {"count": self.count, "best": self.best}


@dataclass
class RunResult:
    algorithm: str
    value: float
    total_samples: int
    per_arm: List[ArmStats]
    wall_clock: float = 0.0
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def accounting_holds(self) -> bool:
        sampled = [s.best for s in self.per_arm if s.count > 0]
        return (
            self.total_samples == sum(s.count for s in self.per_arm)
            and bool(sampled)
            and self.value == max(sampled)
        )

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        payload = {
            "algorithm": self.algorithm,
            "value": self.value,
            "total_samples": self.total_samples,
            "per_arm": [dict(arm_index=i + 1, **s.to_dict()) for i, s in enumerate(self.per_arm)],
            "diagnostics": self.diagnostics,
        }
        if include_timing:
            payload["wall_clock"] = self.wall_clock
        return payload


def _check_arm_index(instance: BanditInstance, k: int):
    if not (0 <= k < instance.size):
        raise ParameterError(f"arm index {k} outside [0, {instance.size - 1}]", "k")


def sample_arm(instance: BanditInstance, k: int, stats: ArmStats, rng: np.random.Generator) -> float:
    """Draw one reward from arm k and update its running count and maximum."""
    _check_arm_index(instance, k)
    reward = instance.arms[k].sample(rng)
    stats.record(reward)
    return reward


def sample_arm_batch(
    instance: BanditInstance, k: int, stats: ArmStats, rng: np.random.Generator, n: int
) -> float:
    """Draw n rewards from arm k in vectorized chunks; returns the batch maximum."""
    _check_arm_index(instance, k)
    arm = instance.arms[k]
    top = -np.inf
    remaining = int(n)
    while remaining > 0:
        chunk = min(remaining, SAMPLE_CHUNK)
        rewards = arm.sample_many(rng, chunk)
        stats.record_batch(rewards)
        top = max(top, float(np.max(rewards)))
        remaining -= chunk
    return top


def unify(instance: BanditInstance) -> BanditInstance:
    """
    Single-arm instance drawing a uniformly random original arm per sample.

    The mixture inherits the tail bound with A scaled by 1/|K|, which follows from
    the per-arm bounds, so the mixture itself is not re-checked.
    """
    mixture = FiniteMixture.equal_weights(instance.arms)
    tail = TailParams(A=instance.tail.A / instance.size, beta=instance.tail.beta, eps0=instance.tail.eps0)
    return BanditInstance(arms=(mixture,), tail=tail, unchecked=True)


def gaps(instance: BanditInstance) -> List[float]:
    top = instance.mu_star()
    return [top - arm.max_reward() for arm in instance.arms]


def new_stats(size: int) -> List[ArmStats]:
    return [ArmStats() for _ in range(size)]


def overall_best(stats: Sequence[ArmStats]) -> float:
    return max(s.best for s in stats if s.count > 0)
