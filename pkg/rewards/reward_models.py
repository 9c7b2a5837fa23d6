"""
Reward distribution models for max K-armed bandit simulations.

Every model has a finite maximal reward, an exact CDF (right-continuous) and its
left limit, a closed-form survival function, a generalized-inverse quantile used
for inverse-transform sampling, and a decomposition into power-law density pieces
plus atoms. The decomposition is what the lower-bound constructions reweight.

Distributions are immutable and hashable; random streams are numpy Generators
owned by the caller.
"""

import logging
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from cachetools import LRUCache, cached
from cachetools.keys import hashkey

from core.errors import ParameterError

logger = logging.getLogger(__name__)

# Tolerances for the tail-envelope comparison: tail >= A*eps^beta - ATOL - RTOL*A*eps^beta
ASSUMPTION_ATOL = 1e-12
ASSUMPTION_RTOL = 1e-9

# Smallest grid point of check_assumption1, relative to the top of the grid
GRID_FLOOR = 1e-6

_WEIGHT_TOL = 1e-9


def _require_finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"must be finite, got {value}", name)
    return value


def _require_positive(value: float, name: str) -> float:
    value = _require_finite(value, name)
    if value <= 0:
        raise ParameterError(f"must be > 0, got {value}", name)
    return value


@dataclass(frozen=True)
class TailParams:
    """Known tail constants: P(X > mu*_k - eps) >= A * eps**beta for 0 < eps <= eps0."""

    A: float
    beta: float
    eps0: float

    def __post_init__(self):
        _require_positive(self.A, "A")
        if float(self.beta) == 0.0:
            raise ParameterError("beta = 0 is unsupported (confidence radius exponent 1/beta undefined)", "beta")
        _require_positive(self.beta, "beta")
        _require_positive(self.eps0, "eps0")
        if self.A * self.eps0 ** self.beta > 1.0 + ASSUMPTION_ATOL:
            raise ParameterError(
                f"A * eps0**beta = {self.A * self.eps0 ** self.beta:.6g} exceeds 1", "eps0"
            )

    def envelope(self, eps: float) -> float:
        """Required tail mass A * eps**beta."""
        return self.A * eps ** self.beta

    def with_eps0(self, eps0: float) -> "TailParams":
        return TailParams(A=self.A, beta=self.beta, eps0=eps0)


@dataclass(frozen=True)
class PowerPiece:
    """Density coef * (anchor - x)**exponent on the open interval (lo, hi)."""

    lo: float
    hi: float
    coef: float
    exponent: float
    anchor: float

    def density(self, x: float) -> float:
        if x <= self.lo or x >= self.hi:
            return 0.0
        return self.coef * (self.anchor - x) ** self.exponent

    def mass(self) -> float:
        """Closed-form integral of the piece."""
        p = self.exponent + 1.0
        return self.coef / p * ((self.anchor - self.lo) ** p - (self.anchor - self.hi) ** p)

    def scaled(self, factor: float) -> "PowerPiece":
        return PowerPiece(self.lo, self.hi, self.coef * factor, self.exponent, self.anchor)

    def clipped(self, lo: float, hi: float) -> Optional["PowerPiece"]:
        new_lo, new_hi = max(self.lo, lo), min(self.hi, hi)
        if new_lo >= new_hi:
            return None
        return PowerPiece(new_lo, new_hi, self.coef, self.exponent, self.anchor)


class RewardDistribution(ABC):
    """Abstract base class for arm reward distributions with a finite maximal reward."""

    @abstractmethod
    def max_reward(self) -> float:
        """inf{mu : F(mu) = 1}."""

    @abstractmethod
    def support_lo(self) -> float:
        """Smallest value the distribution can produce."""

    @abstractmethod
    def cdf(self, mu: float) -> float:
        """P(X <= mu)."""

    @abstractmethod
    def cdf_left(self, mu: float) -> float:
        """P(X < mu), the left limit of the CDF."""

    @abstractmethod
    def survival(self, mu: float) -> float:
        """P(X > mu), evaluated without cancellation."""

    @abstractmethod
    def _quantile(self, u: float) -> float:
        """Generalized inverse for u already known to lie in (0, 1]."""

    @abstractmethod
    def continuous_pieces(self) -> List[PowerPiece]:
        """Absolutely continuous part as a list of power-law density pieces."""

    @abstractmethod
    def atoms(self) -> List[Tuple[float, float]]:
        """Point masses as (location, mass) pairs."""

    def quantile(self, u: float) -> float:
        """inf{mu : F(mu) >= u} for u in (0, 1]."""
        u = float(u)
        if not (0.0 < u <= 1.0):
            raise ParameterError(f"quantile level must lie in (0, 1], got {u}", "u")
        return self._quantile(u)

    @abstractmethod
    def _tail_mass(self, eps: float) -> float:
        """P(X > mu* - eps) computed from the distance eps, never from mu* - eps."""

    def tail_mass(self, eps: float) -> float:
        """P(X > mu* - eps)."""
        if eps <= 0:
            raise ParameterError(f"must be > 0, got {eps}", "eps")
        return self._tail_mass(float(eps))

    def sample(self, rng: np.random.Generator) -> float:
        # 1 - U maps [0, 1) onto (0, 1]
        return self._quantile(1.0 - rng.random())

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self._quantile_array(1.0 - rng.random(n))

    def _quantile_array(self, u: np.ndarray) -> np.ndarray:
        return np.fromiter((self._quantile(float(x)) for x in u), dtype=float, count=len(u))

    def cdf_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.fromiter((self.cdf(float(v)) for v in x.ravel()), dtype=float, count=x.size).reshape(x.shape)


@dataclass(frozen=True)
class PowerTail(RewardDistribution):
    """F(mu) = 1 - A (mu_star - mu)**beta on [mu_star - A**(-1/beta), mu_star]."""

    mu_star: float
    A: float
    beta: float

    def __post_init__(self):
        _require_finite(self.mu_star, "mu_star")
        _require_positive(self.A, "A")
        _require_positive(self.beta, "beta")

    @property
    def width(self) -> float:
        return self.A ** (-1.0 / self.beta)

    def max_reward(self) -> float:
        return self.mu_star

    def support_lo(self) -> float:
        return self.mu_star - self.width

    def cdf(self, mu: float) -> float:
        if mu >= self.mu_star:
            return 1.0
        d = self.mu_star - mu
        if d >= self.width:
            return 0.0
        return 1.0 - self.A * d ** self.beta

    def cdf_left(self, mu: float) -> float:
        return self.cdf(mu)

    def survival(self, mu: float) -> float:
        if mu >= self.mu_star:
            return 0.0
        d = self.mu_star - mu
        if d >= self.width:
            return 1.0
        return self.A * d ** self.beta

    def _tail_mass(self, eps: float) -> float:
        if eps >= self.width:
            return 1.0
        return self.A * eps ** self.beta

    def _quantile(self, u: float) -> float:
        return self.mu_star - ((1.0 - u) / self.A) ** (1.0 / self.beta)

    def _quantile_array(self, u: np.ndarray) -> np.ndarray:
        return self.mu_star - ((1.0 - u) / self.A) ** (1.0 / self.beta)

    def cdf_array(self, x: np.ndarray) -> np.ndarray:
        d = np.clip(self.mu_star - np.asarray(x, dtype=float), 0.0, self.width)
        return np.clip(1.0 - self.A * d ** self.beta, 0.0, 1.0)

    def continuous_pieces(self) -> List[PowerPiece]:
        return [PowerPiece(self.support_lo(), self.mu_star, self.A * self.beta, self.beta - 1.0, self.mu_star)]

    def atoms(self) -> List[Tuple[float, float]]:
        return []


@dataclass(frozen=True)
class Uniform(RewardDistribution):
    lo: float
    hi: float

    def __post_init__(self):
        _require_finite(self.lo, "lo")
        _require_finite(self.hi, "hi")
        if not self.lo < self.hi:
            raise ParameterError(f"lo must be < hi, got [{self.lo}, {self.hi}]", "uniform")

    def max_reward(self) -> float:
        return self.hi

    def support_lo(self) -> float:
        return self.lo

    def cdf(self, mu: float) -> float:
        return min(1.0, max(0.0, (mu - self.lo) / (self.hi - self.lo)))

    def cdf_left(self, mu: float) -> float:
        return self.cdf(mu)

    def survival(self, mu: float) -> float:
        return min(1.0, max(0.0, (self.hi - mu) / (self.hi - self.lo)))

    def _tail_mass(self, eps: float) -> float:
        return min(1.0, eps / (self.hi - self.lo))

    def _quantile(self, u: float) -> float:
        return self.lo + u * (self.hi - self.lo)

    def _quantile_array(self, u: np.ndarray) -> np.ndarray:
        return self.lo + u * (self.hi - self.lo)

    def cdf_array(self, x: np.ndarray) -> np.ndarray:
        return np.clip((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def continuous_pieces(self) -> List[PowerPiece]:
        return [PowerPiece(self.lo, self.hi, 1.0 / (self.hi - self.lo), 0.0, self.hi)]

    def atoms(self) -> List[Tuple[float, float]]:
        return []


@dataclass(frozen=True)
class PointMass(RewardDistribution):
    mu_star: float

    def __post_init__(self):
        _require_finite(self.mu_star, "mu_star")

    def max_reward(self) -> float:
        return self.mu_star

    def support_lo(self) -> float:
        return self.mu_star

    def cdf(self, mu: float) -> float:
        return 1.0 if mu >= self.mu_star else 0.0

    def cdf_left(self, mu: float) -> float:
        return 1.0 if mu > self.mu_star else 0.0

    def survival(self, mu: float) -> float:
        return 1.0 if mu < self.mu_star else 0.0

    def _tail_mass(self, eps: float) -> float:
        return 1.0

    def _quantile(self, u: float) -> float:
        return self.mu_star

    def _quantile_array(self, u: np.ndarray) -> np.ndarray:
        return np.full(len(u), self.mu_star, dtype=float)

    def cdf_array(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) >= self.mu_star).astype(float)

    def continuous_pieces(self) -> List[PowerPiece]:
        return []

    def atoms(self) -> List[Tuple[float, float]]:
        return [(self.mu_star, 1.0)]


@dataclass(frozen=True)
class FiniteMixture(RewardDistribution):
    """Convex combination of component distributions, given as (weight, dist) pairs."""

    components: Tuple[Tuple[float, RewardDistribution], ...]

    def __post_init__(self):
        if not self.components:
            raise ParameterError("mixture needs at least one component", "components")
        for weight, dist in self.components:
            if not (0.0 <= weight <= 1.0):
                raise ParameterError(f"weights must lie in [0, 1], got {weight}", "components")
            if not isinstance(dist, RewardDistribution):
                raise ParameterError(f"component {dist!r} is not a reward distribution", "components")
        total = math.fsum(w for w, _ in self.components)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ParameterError(f"weights sum to {total}, expected 1", "components")

    @classmethod
    def equal_weights(cls, arms) -> "FiniteMixture":
        arms = tuple(arms)
        weight = 1.0 / len(arms) if arms else 0.0
        return cls(components=tuple((weight, arm) for arm in arms))

    @property
    def weights(self) -> np.ndarray:
        w = np.array([weight for weight, _ in self.components], dtype=float)
        return w / w.sum()

    def max_reward(self) -> float:
        return max(dist.max_reward() for w, dist in self.components if w > 0)

    def support_lo(self) -> float:
        return min(dist.support_lo() for w, dist in self.components if w > 0)

    def cdf(self, mu: float) -> float:
        return min(1.0, math.fsum(w * dist.cdf(mu) for w, dist in self.components))

    def cdf_left(self, mu: float) -> float:
        return min(1.0, math.fsum(w * dist.cdf_left(mu) for w, dist in self.components))

    def survival(self, mu: float) -> float:
        return min(1.0, math.fsum(w * dist.survival(mu) for w, dist in self.components))

    def _tail_mass(self, eps: float) -> float:
        top = self.max_reward()
        total = []
        for w, dist in self.components:
            if w <= 0:
                continue
            # Distance below this component's own maximum; zero for the top components
            shifted = eps - (top - dist.max_reward())
            if shifted > 0:
                total.append(w * dist.tail_mass(shifted))
        return min(1.0, math.fsum(total))

    def _quantile(self, u: float) -> float:
        lo, hi = self.support_lo(), self.max_reward()
        if self.cdf(lo) >= u:
            return lo
        # Invariant: cdf(lo) < u <= cdf(hi)
        while True:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                return hi
            if self.cdf(mid) >= u:
                hi = mid
            else:
                lo = mid

    def sample(self, rng: np.random.Generator) -> float:
        j = int(rng.choice(len(self.components), p=self.weights))
        return self.components[j][1].sample(rng)

    def sample_components(self, rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Draw n rewards, returning (component index, reward) arrays."""
        idx = rng.choice(len(self.components), size=n, p=self.weights)
        values = np.empty(n, dtype=float)
        for j in np.flatnonzero(np.bincount(idx, minlength=len(self.components))):
            mask = idx == j
            values[mask] = self.components[j][1].sample_many(rng, int(mask.sum()))
        return idx, values

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.sample_components(rng, n)[1]

    def cdf_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for w, dist in self.components:
            total += w * dist.cdf_array(x)
        return np.clip(total, 0.0, 1.0)

    def continuous_pieces(self) -> List[PowerPiece]:
        return [piece.scaled(w) for w, dist in self.components for piece in dist.continuous_pieces() if w > 0]

    def atoms(self) -> List[Tuple[float, float]]:
        return [(x, w * m) for w, dist in self.components for x, m in dist.atoms() if w > 0]


@dataclass(frozen=True)
class PerturbedTail(RewardDistribution):
    """
    Piecewise reweighting of a base distribution plus an appended power-law tail.

    Base mass strictly below `split` is scaled by `lower_weight`, a base atom at
    `split` by `atom_weight`, base mass above `split` is kept unchanged, and the
    density tail_A * tail_beta * (tail_end - mu)**(tail_beta - 1) is added on
    (tail_start, tail_end]. The new maximal reward is tail_end.
    """

    base: RewardDistribution
    lower_weight: float
    split: float
    atom_weight: float
    tail_A: float
    tail_beta: float
    tail_start: float
    tail_end: float

    def __post_init__(self):
        if not self.tail_start < self.tail_end:
            raise ParameterError(
                f"tail window ({self.tail_start}, {self.tail_end}] is empty", "tail_window"
            )
        if self.tail_start < self.base.max_reward() - 1e-12:
            raise ParameterError("appended tail must start at or above the base maximum", "tail_start")
        _require_positive(self.tail_A, "tail_A")
        _require_positive(self.tail_beta, "tail_beta")
        if self.lower_weight < 0 or self.atom_weight < 0:
            raise ParameterError("reweighting coefficients must be nonnegative", "weights")

    def _split_masses(self) -> Tuple[float, float, float]:
        below = self.base.cdf_left(self.split)
        at = self.base.cdf(self.split)
        return below, at, at - below

    def appended_mass(self) -> float:
        return self.tail_A * (self.tail_end - self.tail_start) ** self.tail_beta

    def _tail_cdf(self, mu: float) -> float:
        if mu <= self.tail_start:
            return 0.0
        if mu >= self.tail_end:
            return self.appended_mass()
        return self.appended_mass() - self.tail_A * (self.tail_end - mu) ** self.tail_beta

    def _tail_survival(self, mu: float) -> float:
        if mu < self.tail_start:
            return self.appended_mass()
        if mu >= self.tail_end:
            return 0.0
        return self.tail_A * (self.tail_end - mu) ** self.tail_beta

    def max_reward(self) -> float:
        return self.tail_end

    def support_lo(self) -> float:
        return self.base.support_lo()

    def cdf(self, mu: float) -> float:
        below, at, atom = self._split_masses()
        if mu < self.split:
            base_part = self.lower_weight * self.base.cdf(mu)
        else:
            base_part = self.lower_weight * below + self.atom_weight * atom + (self.base.cdf(mu) - at)
        return min(1.0, base_part + self._tail_cdf(mu))

    def cdf_left(self, mu: float) -> float:
        below, at, atom = self._split_masses()
        if mu <= self.split:
            base_part = self.lower_weight * self.base.cdf_left(mu)
        else:
            base_part = self.lower_weight * below + self.atom_weight * atom + (self.base.cdf_left(mu) - at)
        return min(1.0, base_part + self._tail_cdf(mu))

    def _reweighted_survival(self, mu: float) -> float:
        """Base contribution to P(X > mu) for mu below split."""
        below, at, atom = self._split_masses()
        return (1.0 - at) + self.atom_weight * atom + self.lower_weight * (below - self.base.cdf(mu))

    def survival(self, mu: float) -> float:
        base_part = self.base.survival(mu) if mu >= self.split else self._reweighted_survival(mu)
        return min(1.0, max(0.0, base_part + self._tail_survival(mu)))

    def _tail_mass(self, eps: float) -> float:
        appended = self.tail_A * min(eps, self.tail_end - self.tail_start) ** self.tail_beta
        shifted = eps - (self.tail_end - self.base.max_reward())
        if shifted <= 0:
            return min(1.0, appended)
        mu = self.tail_end - eps
        base_part = self.base.tail_mass(shifted) if mu >= self.split else self._reweighted_survival(mu)
        return min(1.0, max(0.0, base_part + appended))

    def _quantile(self, u: float) -> float:
        below, at, atom = self._split_masses()
        m_lower = self.lower_weight * below
        if u <= m_lower:
            return self.base.quantile(min(1.0, u / self.lower_weight))
        m_atom = m_lower + self.atom_weight * atom
        if u <= m_atom:
            return self.split
        m_upper = m_atom + (1.0 - at)
        if u <= m_upper and at < 1.0:
            return self.base.quantile(min(1.0, at + (u - m_atom)))
        # Closed-form inverse of the appended segment
        remaining = self.appended_mass() - (u - m_upper)
        if remaining <= 0.0:
            return self.tail_end
        return self.tail_end - (remaining / self.tail_A) ** (1.0 / self.tail_beta)

    def continuous_pieces(self) -> List[PowerPiece]:
        pieces: List[PowerPiece] = []
        for piece in self.base.continuous_pieces():
            lower = piece.clipped(-math.inf, self.split)
            if lower is not None and self.lower_weight > 0:
                pieces.append(lower.scaled(self.lower_weight))
            upper = piece.clipped(self.split, math.inf)
            if upper is not None:
                pieces.append(upper)
        pieces.append(
            PowerPiece(
                self.tail_start,
                self.tail_end,
                self.tail_A * self.tail_beta,
                self.tail_beta - 1.0,
                self.tail_end,
            )
        )
        return pieces

    def atoms(self) -> List[Tuple[float, float]]:
        out = []
        for x, m in self.base.atoms():
            if x < self.split:
                out.append((x, self.lower_weight * m))
            elif x == self.split:
                out.append((x, self.atom_weight * m))
            else:
                out.append((x, m))
        return [(x, m) for x, m in out if m > 0]


@dataclass(frozen=True)
class AssumptionCheck:
    passed: bool
    grid_size: int
    eps_max: float
    violation_eps: Optional[float] = None
    tail_mass: Optional[float] = None
    required: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "grid_size": self.grid_size,
            "eps_max": self.eps_max,
            "violation_eps": self.violation_eps,
            "tail_mass": self.tail_mass,
            "required": self.required,
        }


def assumption_grid(eps_max: float, grid_size: int) -> np.ndarray:
    """Geometric grid of grid_size tail radii from eps_max * 1e-6 up to eps_max."""
    if grid_size < 2:
        raise ParameterError(f"must be >= 2, got {grid_size}", "grid_size")
    return np.geomspace(eps_max * GRID_FLOOR, eps_max, int(grid_size))


@cached(
    cache=LRUCache(maxsize=4096),
    key=lambda dist, params, grid_size=64, eps_max=None: hashkey(dist, params, grid_size, eps_max),
    lock=threading.RLock(),
)
def check_assumption1(
    dist: RewardDistribution,
    params: TailParams,
    grid_size: int = 64,
    eps_max: Optional[float] = None,
) -> AssumptionCheck:
    """
    Evaluate tail_mass(eps) >= A * eps**beta on a geometric grid in (0, eps0].

    Args:
        dist: Distribution to check.
        params: Tail constants.
        grid_size: Number of grid points (>= 2).
        eps_max: Top of the grid; defaults to params.eps0.

    Returns:
        AssumptionCheck with the first (smallest) violating eps, if any.
    """
    top = params.eps0 if eps_max is None else float(eps_max)
    for eps in assumption_grid(top, grid_size):
        eps = float(eps)
        tail = dist.tail_mass(eps)
        required = params.envelope(eps)
        if tail < required - ASSUMPTION_ATOL - ASSUMPTION_RTOL * required:
            logger.debug(f"Tail assumption fails for {dist!r:.80} at eps={eps:.6g}: {tail:.6g} < {required:.6g}")
            return AssumptionCheck(False, int(grid_size), top, eps, tail, required)
    return AssumptionCheck(True, int(grid_size), top)
