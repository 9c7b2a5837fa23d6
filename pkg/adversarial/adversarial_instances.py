"""
Perturbed instances used by the sample-complexity lower bounds.

For arm k the multi-arm construction moves mass onto (mu*, mu* + eps] so that
k becomes the unique best arm by at least eps, while the tail assumption keeps
holding with the original constants. The unified construction does the same to
the equal-weight mixture.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

from scipy import integrate

from bandit.algorithms import PacParams
from bandit.bandit_env import BanditInstance, unify
from core.errors import PreconditionError, UnsupportedVariantError
from rewards.reward_models import (
    FiniteMixture,
    PerturbedTail,
    PointMass,
    PowerPiece,
    PowerTail,
    RewardDistribution,
    TailParams,
    Uniform,
    check_assumption1,
)

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-6
# Relative offset below the expected maximum at which some mass must remain
MAXIMUM_OFFSET = 1e-6
CHECK_GRID = 64

_PERTURBABLE = (PowerTail, Uniform, PointMass)


@dataclass
class HypothesisConstruction:
    """Perturbed arm k (1-based) of the multi-arm construction."""

    k: int
    case: str
    base: RewardDistribution
    perturbed: PerturbedTail
    mu_star: float
    eps: float
    gamma1: float
    gamma2: Optional[float]
    gamma3: Optional[float]
    gamma_k: float
    t_k: float
    mu_bar: Optional[float]
    atom_mass: float
    shift: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "arm_index": self.k,
            "case": self.case,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "gamma3": self.gamma3,
            "gamma_k": self.gamma_k,
            "t_k": self.t_k,
            "mu_bar": self.mu_bar,
            "atom_mass": self.atom_mass,
            "new_maximum": self.perturbed.max_reward(),
        }


@dataclass
class UnifiedHypothesis:
    perturbed: PerturbedTail
    gamma: float
    t: float
    K: int
    mu_star: float
    eps: float
    tail: TailParams

    def to_dict(self) -> Dict[str, Any]:
        return {"gamma": self.gamma, "t": self.t, "new_maximum": self.perturbed.max_reward()}


@dataclass
class ConstructionReport:
    checks: Dict[str, bool]
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "checks": dict(self.checks), "details": dict(self.details)}


def _check_common_preconditions(tail: TailParams, pac: PacParams):
    if tail.beta > 1:
        raise PreconditionError(f"construction requires beta <= 1, got {tail.beta:g}")
    if not (0 < pac.eps < tail.eps0):
        raise PreconditionError(f"construction requires 0 < eps < eps0, got eps={pac.eps:g}, eps0={tail.eps0:g}")


def upper_level_point(base: RewardDistribution, level: float) -> float:
    """sup{mu : F(mu) <= level} for level in [0, 1)."""
    if isinstance(base, PointMass):
        return base.mu_star
    if level <= 0:
        return base.support_lo()
    # PowerTail and Uniform have continuous, strictly increasing CDFs on their support
    return base.quantile(level)


def build_hypothesis_multi(instance: BanditInstance, k: int, pac: PacParams) -> HypothesisConstruction:
    """
    Perturb arm k (0-based) so that its new maximum is mu* + eps.

    Raises:
        PreconditionError: beta > 1, eps outside (0, eps0), eps0 > (4A)^(-1/beta) or delta >= 3/16.
        UnsupportedVariantError: arm k is not a PowerTail, Uniform or PointMass.
    """
    tail = instance.tail
    _check_common_preconditions(tail, pac)
    limit = (4.0 * tail.A) ** (-1.0 / tail.beta)
    if tail.eps0 > limit * (1 + 1e-12):
        raise PreconditionError(f"construction requires eps0 <= (4A)^(-1/beta) = {limit:.6g}, got {tail.eps0:g}")
    log_term = math.log(3.0 / (16.0 * pac.delta))
    if log_term <= 0:
        raise PreconditionError(f"threshold t_k needs delta < 3/16, got {pac.delta:g}")

    base = instance.arms[k]
    if not isinstance(base, _PERTURBABLE):
        raise UnsupportedVariantError(
            f"arm {k + 1} is a {type(base).__name__}; perturbation supports power_tail, uniform and point_mass"
        )

    A, beta = tail.A, tail.beta
    mu_star = instance.mu_star()
    mu_k = base.max_reward()
    shift = mu_star - mu_k + pac.eps
    top = mu_star + pac.eps

    gamma1 = 1.0 - tail.envelope(tail.eps0)
    gamma_k = 1.0 - 2.0 * A * min(tail.eps0, shift) ** beta
    t_k = log_term / (4.0 * (1.0 - gamma_k))

    if tail.eps0 <= shift:
        # Whole window (top - eps0, top] lies above mu_k: shrink the base uniformly
        atom = base.cdf(mu_k) - base.cdf_left(mu_k)
        perturbed = PerturbedTail(
            base=base,
            lower_weight=gamma1,
            split=mu_k,
            atom_weight=gamma1,
            tail_A=A,
            tail_beta=beta,
            tail_start=top - tail.eps0,
            tail_end=top,
        )
        return HypothesisConstruction(
            k=k + 1, case="a", base=base, perturbed=perturbed, mu_star=mu_star, eps=pac.eps,
            gamma1=gamma1, gamma2=None, gamma3=None, gamma_k=gamma_k, t_k=t_k,
            mu_bar=None, atom_mass=atom, shift=shift,
        )

    mu_bar = upper_level_point(base, gamma1)
    F_bar = base.cdf(mu_bar)
    atom = F_bar - base.cdf_left(mu_bar)
    added = A * shift**beta
    gamma2 = 1.0 - added / gamma1
    gamma3 = None
    if atom > 0:
        # total mass: gamma2 (F_bar - atom) + gamma3 atom + (1 - F_bar) + added = 1
        gamma3 = (F_bar - added - gamma2 * (F_bar - atom)) / atom
    perturbed = PerturbedTail(
        base=base,
        lower_weight=gamma2,
        split=mu_bar,
        atom_weight=gamma3 if gamma3 is not None else gamma2,
        tail_A=A,
        tail_beta=beta,
        tail_start=mu_k,
        tail_end=top,
    )
    return HypothesisConstruction(
        k=k + 1, case="b", base=base, perturbed=perturbed, mu_star=mu_star, eps=pac.eps,
        gamma1=gamma1, gamma2=gamma2, gamma3=gamma3, gamma_k=gamma_k, t_k=t_k,
        mu_bar=mu_bar, atom_mass=atom, shift=shift,
    )


def build_hypothesis_unified(instance: BanditInstance, pac: PacParams) -> UnifiedHypothesis:
    tail = instance.tail
    K = instance.size
    _check_common_preconditions(tail, pac)
    limit = (K / (2.0 * tail.A)) ** (1.0 / tail.beta)
    if tail.eps0 > limit * (1 + 1e-12):
        raise PreconditionError(f"unified construction requires eps0 <= (|K|/(2A))^(1/beta) = {limit:.6g}")
    log_term = math.log(3.0 / (5.0 * pac.delta))
    if log_term <= 0:
        raise PreconditionError(f"threshold t needs delta < 3/5, got {pac.delta:g}")
    for index, arm in enumerate(instance.arms):
        if not isinstance(arm, _PERTURBABLE + (FiniteMixture,)):
            raise UnsupportedVariantError(f"arm {index + 1} ({type(arm).__name__}) has no density decomposition")

    unified = unify(instance)
    mixture = unified.arms[0]
    mu_star = instance.mu_star()
    added = tail.envelope(pac.eps) / K
    gamma = 1.0 - added
    perturbed = PerturbedTail(
        base=mixture,
        lower_weight=gamma,
        split=mu_star,
        atom_weight=gamma,
        tail_A=tail.A / K,
        tail_beta=tail.beta,
        tail_start=mu_star,
        tail_end=mu_star + pac.eps,
    )
    return UnifiedHypothesis(
        perturbed=perturbed,
        gamma=gamma,
        t=log_term / (4.0 * (1.0 - gamma)),
        K=K,
        mu_star=mu_star,
        eps=pac.eps,
        tail=unified.tail,
    )


def integrate_piece(piece: PowerPiece) -> float:
    """Quadrature of one density piece, with an algebraic weight at a singular right end."""
    if piece.exponent < 0 and piece.hi == piece.anchor:
        value, _ = integrate.quad(
            lambda x: piece.coef, piece.lo, piece.hi, weight="alg", wvar=(0.0, piece.exponent)
        )
        return value
    value, _ = integrate.quad(piece.density, piece.lo, piece.hi, limit=200)
    return value


def total_mass(dist: RewardDistribution) -> float:
    """Numerical integral of the density pieces plus the atom masses."""
    return math.fsum(integrate_piece(p) for p in dist.continuous_pieces()) + math.fsum(
        m for _, m in dist.atoms()
    )


def has_maximum_at(dist: RewardDistribution, top: float, eps: float) -> bool:
    """True when F(top) = 1 and P(X > top - eps * MAXIMUM_OFFSET) > 0."""
    complete = dist.cdf(top) >= 1.0 - NORMALIZATION_TOL
    return complete and dist.survival(top - eps * MAXIMUM_OFFSET) > 0.0


def _gamma_bracket(h: HypothesisConstruction, tail: TailParams) -> Dict[str, bool]:
    if h.case == "a":
        return {"gamma_k_below_gamma1": h.gamma_k <= h.gamma1 <= 1.0}
    lower = 1.0 - 2.0 * tail.A * h.shift**tail.beta
    bracket = {"gamma2_in_range": lower - 1e-15 <= h.gamma2 <= 1.0}
    if h.gamma3 is not None:
        bracket["gamma3_at_least_gamma2"] = h.gamma3 >= h.gamma2 - 1e-15
        bracket["gamma_k_below_gammas"] = h.gamma_k <= min(h.gamma2, h.gamma3) + 1e-15
    else:
        bracket["gamma_k_below_gammas"] = h.gamma_k <= h.gamma2 + 1e-15
    return bracket


def verify_construction(h: Union[HypothesisConstruction, UnifiedHypothesis], tail: TailParams) -> ConstructionReport:
    """
    Check normalization, the new maximum, the tail assumption and the gamma bracket.

    For the unified construction the tail assumption is checked with A/|K| on the
    perturbation window (0, eps]; the (0, eps0] result is reported in details only.
    """
    mass = total_mass(h.perturbed)
    expected_top = h.mu_star + h.eps
    details: Dict[str, Any] = {
        "total_mass": mass,
        "expected_maximum": expected_top,
        "mass_above_old_maximum": h.perturbed.survival(h.mu_star),
    }

    if isinstance(h, UnifiedHypothesis):
        window = check_assumption1(h.perturbed, h.tail, CHECK_GRID, eps_max=h.eps)
        details["assumption_window"] = window.to_dict()
        details["assumption_full_range"] = check_assumption1(h.perturbed, h.tail, CHECK_GRID).to_dict()
        expected_gamma = 1.0 - tail.envelope(h.eps) / h.K
        bracket_ok = math.isclose(h.gamma, expected_gamma, rel_tol=1e-15, abs_tol=0.0) and 0.0 < h.gamma < 1.0
        assumption_ok = window.passed
    else:
        assumption = check_assumption1(h.perturbed, tail, CHECK_GRID)
        details["assumption"] = assumption.to_dict()
        bracket = _gamma_bracket(h, tail)
        details["gamma_bracket"] = bracket
        bracket_ok = all(bracket.values())
        assumption_ok = assumption.passed

    checks = {
        "normalization": abs(mass - 1.0) < NORMALIZATION_TOL,
        "new_maximum": has_maximum_at(h.perturbed, expected_top, h.eps),
        "assumption": assumption_ok,
        "gamma_bracket": bracket_ok,
    }
    report = ConstructionReport(checks=checks, details=details)
    if not report.passed:
        logger.warning(f"Construction check failed: {[name for name, ok in checks.items() if not ok]}")
    return report


def build_adversarial_report(instance: BanditInstance, pac: PacParams) -> Dict[str, Any]:
    """Build and verify every per-arm construction plus the unified one."""
    arms: List[Dict[str, Any]] = []
    thresholds = []
    for k in range(instance.size):
        h = build_hypothesis_multi(instance, k, pac)
        row = h.to_dict()
        row["checks"] = verify_construction(h, instance.tail).to_dict()["checks"]
        arms.append(row)
        thresholds.append(h.t_k)

    unified = build_hypothesis_unified(instance, pac)
    unified_row = unified.to_dict()
    unified_row["checks"] = verify_construction(unified, instance.tail).to_dict()["checks"]

    optimal = instance.optimal_arm()
    dominates = all(thresholds[optimal] >= t for t in thresholds)
    passed = (
        dominates
        and all(all(r["checks"].values()) for r in arms)
        and all(unified_row["checks"].values())
    )
    logger.info(f"Adversarial constructions for {instance.size} arms: {'pass' if passed else 'FAIL'}")
    return {
        "arms": arms,
        "unified": unified_row,
        "optimal_threshold_dominates": dominates,
        "passed": bool(passed),
    }
