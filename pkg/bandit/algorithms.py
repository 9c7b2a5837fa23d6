"""
PAC procedures for finding the maximal reward among K arms.

- run_max_cb: optimistic index V^k + UB(C(k)), sample the argmax, stop once its
  confidence radius drops below eps.
- run_maximal_eliminator: doubling batches over a shrinking survivor set.
- run_unified_arm: a fixed number of draws from the equal-weight mixture.

All three are pure functions of (instance, pac, rng state).
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from bandit.bandit_env import (
    SAMPLE_CHUNK,
    BanditInstance,
    RunResult,
    new_stats,
    overall_best,
    sample_arm,
    sample_arm_batch,
    unify,
)
from core.errors import ParameterError, PhaseLimitError, SampleBudgetError
from rewards.reward_models import TailParams

logger = logging.getLogger(__name__)

L_FLOOR = 10.0
MAX_COUNTER = 2**63 - 1
DEFAULT_MAX_PHASES = 64


@dataclass(frozen=True)
class PacParams:
    """Accuracy eps and confidence delta."""

    eps: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise ParameterError(f"must be a finite value > 0, got {self.eps}", "eps")
        if not (0.0 < self.delta < 1.0):
            raise ParameterError(f"must lie in (0, 1), got {self.delta}", "delta")

    def warnings_for(self, tail: TailParams) -> List[str]:
        """Non-fatal issues with this (eps, delta) pair under the given tail constants."""
        notes = []
        if self.eps > tail.eps0:
            notes.append(
                f"eps={self.eps:g} exceeds eps0={tail.eps0:g}; the tail bound says nothing "
                "beyond eps0 and the guarantees do not apply"
            )
        for note in notes:
            logger.warning(note)
        return notes


def _log_term(K_size: int, tail: TailParams, pac: PacParams) -> float:
    """ln(|K| (1 + (-ln delta) / (A eps^beta)))."""
    return math.log(K_size * (1.0 + (-math.log(pac.delta)) / tail.envelope(pac.eps)))


def compute_L(K_size: int, tail: TailParams, pac: PacParams, clamp_L: bool = True) -> float:
    """
    6 ln(|K| (1 + (-ln delta) / (A eps^beta))), lifted to 10 when clamp_L is set.
    """
    if K_size < 1:
        raise ParameterError(f"must be >= 1, got {K_size}", "K_size")
    raw = 6.0 * _log_term(K_size, tail, pac)
    if raw < L_FLOOR:
        if clamp_L:
            return L_FLOOR
        logger.warning(f"L={raw:.4g} is below {L_FLOOR:g}; the Max-CB guarantee assumes L >= 10")
    return raw


def compute_L_me(K_size: int, tail: TailParams, pac: PacParams) -> float:
    """ln(12 ln(|K| (1 + (-ln delta) / (A eps^beta))))."""
    return math.log(12.0 * _log_term(K_size, tail, pac))


def initial_count(L: float, tail: TailParams, pac: PacParams) -> int:
    """floor((L - ln delta) / (A eps0^beta)) + 1."""
    return max(1, math.floor((L - math.log(pac.delta)) / tail.envelope(tail.eps0)) + 1)


def per_arm_cap(L: float, tail: TailParams, pac: PacParams) -> int:
    """Pathwise bound on any arm's Max-CB sample count: floor((L - ln delta) / (A eps^beta)) + 1."""
    return math.floor((L - math.log(pac.delta)) / tail.envelope(pac.eps)) + 1


def _radius(numerator: float, count: float, tail: TailParams) -> float:
    return (numerator / (tail.A * count)) ** (1.0 / tail.beta)


def ucb_radius(count: int, L: float, tail: TailParams, pac: PacParams) -> float:
    """((L - ln delta) / (A count))^(1/beta)."""
    if count < 1:
        raise ParameterError(f"must be >= 1, got {count}", "count")
    numerator = L - math.log(pac.delta)
    if numerator <= 0:
        raise ParameterError(f"L - ln(delta) must be positive, got {numerator}", "L")
    return _radius(numerator, count, tail)


@dataclass(frozen=True)
class MaxCbConfig:
    L: float
    N0: int
    clamp_L: bool = True

    @classmethod
    def from_params(cls, K_size: int, tail: TailParams, pac: PacParams, clamp_L: bool = True) -> "MaxCbConfig":
        L = compute_L(K_size, tail, pac, clamp_L)
        return cls(L=L, N0=initial_count(L, tail, pac), clamp_L=clamp_L)


@dataclass(frozen=True)
class MeConfig:
    """
    Maximal Eliminator settings.

    With literal_argument the confidence radius after phase t is evaluated at
    (2^t - 1/2) n0 instead of the cumulative per-arm count (2^t - 1) n0.
    """

    L_me: float
    n0: int
    max_phases: int = DEFAULT_MAX_PHASES
    literal_argument: bool = False

    @classmethod
    def from_params(
        cls,
        K_size: int,
        tail: TailParams,
        pac: PacParams,
        max_phases: int = DEFAULT_MAX_PHASES,
        literal_argument: bool = False,
    ) -> "MeConfig":
        L_me = compute_L_me(K_size, tail, pac)
        if L_me - math.log(pac.delta) <= 0:
            raise ParameterError(f"L_me - ln(delta) = {L_me - math.log(pac.delta):.4g} must be positive", "delta")
        return cls(
            L_me=L_me,
            n0=initial_count(L_me, tail, pac),
            max_phases=max_phases,
            literal_argument=literal_argument,
        )

    def phase_argument(self, t: int) -> float:
        if self.literal_argument:
            return (2**t - 0.5) * self.n0
        return float((2**t - 1) * self.n0)


def run_max_cb(
    instance: BanditInstance,
    pac: PacParams,
    rng: np.random.Generator,
    config: Optional[MaxCbConfig] = None,
) -> RunResult:
    started = time.perf_counter()
    tail = instance.tail
    K = instance.size
    cfg = config or MaxCbConfig.from_params(K, tail, pac)
    numerator = cfg.L - math.log(pac.delta)

    stats = new_stats(K)
    for k in range(K):
        sample_arm_batch(instance, k, stats[k], rng, cfg.N0)

    counts = np.array([s.count for s in stats], dtype=np.int64)
    best = np.array([s.best for s in stats], dtype=float)
    exponent = 1.0 / tail.beta
    while True:
        radius = (numerator / (tail.A * counts)) ** exponent
        index = best + radius
        # np.argmax returns the first maximizer
        k_star = int(np.argmax(index))
        if radius[k_star] < pac.eps:
            break
        sample_arm(instance, k_star, stats[k_star], rng)
        counts[k_star] = stats[k_star].count
        best[k_star] = stats[k_star].best

    total = int(counts.sum())
    return RunResult(
        algorithm="max_cb",
        value=overall_best(stats),
        total_samples=total,
        per_arm=stats,
        wall_clock=time.perf_counter() - started,
        diagnostics={
            "L": cfg.L,
            "N0": cfg.N0,
            "k_star": k_star + 1,
            "index": float(index[k_star]),
            "radius": float(radius[k_star]),
            "per_arm_cap": per_arm_cap(cfg.L, tail, pac),
        },
    )


def run_maximal_eliminator(
    instance: BanditInstance,
    pac: PacParams,
    rng: np.random.Generator,
    config: Optional[MeConfig] = None,
) -> RunResult:
    started = time.perf_counter()
    tail = instance.tail
    cfg = config or MeConfig.from_params(instance.size, tail, pac)
    numerator = cfg.L_me - math.log(pac.delta)

    stats = new_stats(instance.size)
    survivors = list(range(instance.size))
    phases = []
    radius = math.inf
    for t in range(1, cfg.max_phases + 1):
        batch = 2 ** (t - 1) * cfg.n0
        for k in survivors:
            sample_arm_batch(instance, k, stats[k], rng, batch)
        radius = _radius(numerator, cfg.phase_argument(t), tail)
        leader = max(stats[k].best for k in survivors)
        logger.debug(f"ME phase {t}: batch={batch} survivors={len(survivors)} radius={radius:.6g}")
        phases.append({"phase": t, "batch": batch, "survivors": [k + 1 for k in survivors], "radius": radius})
        if radius < pac.eps:
            return RunResult(
                algorithm="maximal_eliminator",
                value=overall_best(stats),
                total_samples=sum(s.count for s in stats),
                per_arm=stats,
                wall_clock=time.perf_counter() - started,
                diagnostics={
                    "L_me": cfg.L_me,
                    "n0": cfg.n0,
                    "literal_argument": cfg.literal_argument,
                    "phases": phases,
                },
            )
        survivors = [k for k in survivors if stats[k].best + radius >= leader]

    raise PhaseLimitError(cfg.max_phases, radius, pac.eps)


def unified_sample_count(K_size: int, tail: TailParams, pac: PacParams) -> int:
    """ceil(ln(1/delta) |K| / (A eps^beta)) + 1."""
    value = math.log(1.0 / pac.delta) * K_size / tail.envelope(pac.eps)
    if not math.isfinite(value):
        raise ParameterError(f"unified sample count overflows ({value})", "eps")
    return math.ceil(value) + 1


def run_unified_arm(
    instance: BanditInstance,
    pac: PacParams,
    rng: np.random.Generator,
    max_samples: Optional[int] = None,
) -> RunResult:
    """
    Draw the fixed sample count from the unified arm and return the largest reward.

    Per-arm statistics record which original arm each draw came from.

    Raises:
        SampleBudgetError: The count does not fit a 64-bit counter or exceeds max_samples.
    """
    started = time.perf_counter()
    n = unified_sample_count(instance.size, instance.tail, pac)
    if n > MAX_COUNTER:
        raise SampleBudgetError(n, MAX_COUNTER)
    if max_samples is not None and n > max_samples:
        raise SampleBudgetError(n, max_samples)

    mixture = unify(instance).arms[0]
    stats = new_stats(instance.size)
    remaining = n
    while remaining > 0:
        chunk = min(remaining, SAMPLE_CHUNK)
        components, rewards = mixture.sample_components(rng, chunk)
        for k in np.unique(components):
            stats[int(k)].record_batch(rewards[components == k])
        remaining -= chunk

    return RunResult(
        algorithm="unified_arm",
        value=overall_best(stats),
        total_samples=n,
        per_arm=stats,
        wall_clock=time.perf_counter() - started,
        diagnostics={"n": n},
    )


ALGORITHM_ALIASES = {
    "max-cb": "max_cb",
    "max_cb": "max_cb",
    "me": "maximal_eliminator",
    "maximal_eliminator": "maximal_eliminator",
    "maximal-eliminator": "maximal_eliminator",
    "unified": "unified_arm",
    "unified_arm": "unified_arm",
    "unified-arm": "unified_arm",
}


def resolve_algorithm(name: str) -> str:
    try:
        return ALGORITHM_ALIASES[name.strip().lower()]
    except KeyError:
        raise ParameterError(
            f"unknown algorithm {name!r}; choose from {sorted(set(ALGORITHM_ALIASES))}", "algorithm"
        ) from None
