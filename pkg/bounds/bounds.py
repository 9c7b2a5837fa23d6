"""
Closed-form sample-complexity bounds for the multi-arm and unified-arm models.

Precondition violations never raise here: the value is still computed and a
warning string is attached to the report.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from bandit.algorithms import PacParams, compute_L, initial_count
from bandit.bandit_env import BanditInstance, gaps
from rewards.reward_models import TailParams

logger = logging.getLogger(__name__)


def _warn(notes: Optional[List[str]], message: str):
    logger.warning(message)
    if notes is not None:
        notes.append(message)


def multi_arm_precondition_warnings(tail: TailParams, pac: PacParams) -> List[str]:
    notes = []
    if tail.beta > 1:
        notes.append(f"multi-arm lower bound assumes beta <= 1 (beta={tail.beta:g})")
    limit = (4.0 * tail.A) ** (-1.0 / tail.beta)
    if tail.eps0 > limit:
        notes.append(f"multi-arm lower bound assumes eps0 <= (4A)^(-1/beta) = {limit:.6g} (eps0={tail.eps0:g})")
    if not pac.eps < tail.eps0:
        notes.append(f"multi-arm lower bound assumes eps < eps0 (eps={pac.eps:g}, eps0={tail.eps0:g})")
    return notes


def unified_precondition_warnings(K_size: int, tail: TailParams, pac: PacParams) -> List[str]:
    notes = []
    if tail.beta > 1:
        notes.append(f"unified lower bound assumes beta <= 1 (beta={tail.beta:g})")
    limit = (K_size / (2.0 * tail.A)) ** (1.0 / tail.beta)
    if tail.eps0 > limit:
        notes.append(f"unified lower bound assumes eps0 <= (|K|/(2A))^(1/beta) = {limit:.6g} (eps0={tail.eps0:g})")
    return notes


def thm1_lower_bound(instance: BanditInstance, pac: PacParams, notes: Optional[List[str]] = None) -> float:
    """
    Multi-arm lower bound on E[T]:
    sum over k != k* of ln(3/(16 delta)) / (8 A min(eps0, eps + gap_k)^beta).

    k* is the lowest-index optimal arm; a second optimal arm still contributes.
    """
    tail = instance.tail
    for note in multi_arm_precondition_warnings(tail, pac):
        _warn(notes, note)
    log_term = math.log(3.0 / (16.0 * pac.delta))
    if log_term <= 0:
        _warn(notes, f"delta={pac.delta:g} >= 3/16 makes the multi-arm lower bound vacuous; reporting 0")
        return 0.0
    excluded = instance.optimal_arm()
    return math.fsum(
        log_term / (8.0 * tail.A * min(tail.eps0, pac.eps + gap) ** tail.beta)
        for k, gap in enumerate(gaps(instance))
        if k != excluded
    )


def thm2_upper_bound(instance: BanditInstance, pac: PacParams, clamp_L: bool = True) -> Tuple[float, float]:
    """
    Max-CB upper bound on E[T], split into the summation term and the |K| N0 start-up term.
    """
    tail = instance.tail
    L = compute_L(instance.size, tail, pac, clamp_L)
    numerator = L - math.log(pac.delta)
    core = math.fsum(numerator / (tail.A * max(pac.eps, gap) ** tail.beta) for gap in gaps(instance))
    init = float(instance.size * initial_count(L, tail, pac))
    return core, init


def thm3_lower_bound(K_size: int, tail: TailParams, pac: PacParams, notes: Optional[List[str]] = None) -> float:
    """|K| / (4 A eps^beta) * ln(3 / (5 delta))."""
    for note in unified_precondition_warnings(K_size, tail, pac):
        _warn(notes, note)
    log_term = math.log(3.0 / (5.0 * pac.delta))
    if log_term <= 0:
        _warn(notes, f"delta={pac.delta:g} >= 3/5 makes the unified lower bound vacuous; reporting 0")
        return 0.0
    return K_size / (4.0 * tail.envelope(pac.eps)) * log_term


def thm4_upper_bound(K_size: int, tail: TailParams, pac: PacParams) -> float:
    """|K| ln(1/delta) / (A eps^beta) + 2."""
    return K_size * math.log(1.0 / pac.delta) / tail.envelope(pac.eps) + 2.0


def theta_terms(instance: BanditInstance, pac: PacParams) -> Tuple[List[float], List[float]]:
    tail = instance.tail
    beta = tail.beta
    theta1 = [(1.0 + 2.0**beta) / min(tail.eps0, pac.eps + gap) ** beta for gap in gaps(instance)]
    theta2 = [1.0 / max(pac.eps, gap) ** beta + 1.0 / tail.eps0**beta for gap in gaps(instance)]
    return theta1, theta2


@dataclass
class BoundReport:
    thm1_lower: float
    thm2_core: float
    thm2_init: float
    thm2_total: float
    thm3_lower: float
    thm4_upper: float
    theta1: List[float]
    theta2: List[float]
    L: float
    N0: int
    corollary1_factor: Optional[float]
    K: int
    A: float
    beta: float
    eps0: float
    eps: float
    delta: float
    mu_star: float
    mu_star_k: List[float]
    gaps: List[float]
    warnings: List[str] = field(default_factory=list)

    def scalars(self) -> Dict[str, Any]:
        return {
            "K": self.K,
            "A": self.A,
            "beta": self.beta,
            "eps0": self.eps0,
            "eps": self.eps,
            "delta": self.delta,
            "mu_star": self.mu_star,
            "L": self.L,
            "N0": self.N0,
            "thm1_lower": self.thm1_lower,
            "thm2_core": self.thm2_core,
            "thm2_init": self.thm2_init,
            "thm2_total": self.thm2_total,
            "thm3_lower": self.thm3_lower,
            "thm4_upper": self.thm4_upper,
            "corollary1_factor": self.corollary1_factor,
        }

    def arm_rows(self) -> List[Dict[str, Any]]:
        return [
            {"arm_index": k + 1, "mu_star_k": m, "gap": g, "theta1": t1, "theta2": t2}
            for k, (m, g, t1, t2) in enumerate(zip(self.mu_star_k, self.gaps, self.theta1, self.theta2))
        ]

    def to_dict(self) -> Dict[str, Any]:
        payload = self.scalars()
        payload["arms"] = self.arm_rows()
        payload["warnings"] = list(self.warnings)
        return payload


def evaluate_bounds(instance: BanditInstance, pac: PacParams, clamp_L: bool = True) -> BoundReport:
    """Evaluate every bound for one instance and (eps, delta) pair."""
    tail = instance.tail
    notes: List[str] = list(pac.warnings_for(tail))
    L = compute_L(instance.size, tail, pac, clamp_L)
    thm1 = thm1_lower_bound(instance, pac, notes)
    core, init = thm2_upper_bound(instance, pac, clamp_L)
    thm3 = thm3_lower_bound(instance.size, tail, pac, notes)
    thm4 = thm4_upper_bound(instance.size, tail, pac)
    theta1, theta2 = theta_terms(instance, pac)

    log_term = math.log(3.0 / (16.0 * pac.delta))
    factor = 8.0 * (1.0 + 2.0**tail.beta) * (L - math.log(pac.delta)) / log_term if log_term > 0 else None

    return BoundReport(
        thm1_lower=thm1,
        thm2_core=core,
        thm2_init=init,
        thm2_total=core + init,
        thm3_lower=thm3,
        thm4_upper=thm4,
        theta1=theta1,
        theta2=theta2,
        L=L,
        N0=initial_count(L, tail, pac),
        corollary1_factor=factor,
        K=instance.size,
        A=tail.A,
        beta=tail.beta,
        eps0=tail.eps0,
        eps=pac.eps,
        delta=pac.delta,
        mu_star=instance.mu_star(),
        mu_star_k=[arm.max_reward() for arm in instance.arms],
        gaps=gaps(instance),
        warnings=notes,
    )


@dataclass
class CaseVerdict:
    """
    Which model the bounds favour.

    multi_arm_beats_unified_lower: Max-CB's summation term is below the unified lower bound.
    unified_upper_beats_multi_arm: the unified upper bound is below Max-CB's summation term.
    """

    report: BoundReport
    multi_arm_beats_unified_lower: Optional[bool]
    unified_upper_beats_multi_arm: Optional[bool]
    verdict: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "multi_arm_beats_unified_lower": self.multi_arm_beats_unified_lower,
            "unified_upper_beats_multi_arm": self.unified_upper_beats_multi_arm,
            "bounds": self.report.to_dict(),
        }


def case_comparison(instance: BanditInstance, pac: PacParams, clamp_L: bool = True) -> CaseVerdict:
    report = evaluate_bounds(instance, pac, clamp_L)
    if instance.size == 1:
        return CaseVerdict(report, None, None, "not_applicable")

    case1 = report.thm2_core < report.thm3_lower
    case2 = report.thm2_core > report.thm4_upper
    if case1:
        verdict = "multi_arm"
    elif case2:
        verdict = "unified"
    else:
        verdict = "inconclusive"
    logger.info(f"Case comparison for {instance.size} arms: {verdict}")
    return CaseVerdict(report, case1, case2, verdict)
