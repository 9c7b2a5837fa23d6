import json
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from bandit.algorithms import PacParams  # noqa: E402
from bandit.bandit_env import BanditInstance  # noqa: E402
from rewards.reward_models import PointMass, PowerTail, TailParams, Uniform  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def three_uniform_instance():
    """Uniform(0,1), Uniform(0,0.5), Uniform(0,0.5) with A=1, beta=1, eps0=0.5."""
    return BanditInstance(
        arms=(Uniform(0.0, 1.0), Uniform(0.0, 0.5), Uniform(0.0, 0.5)),
        tail=TailParams(A=1.0, beta=1.0, eps0=0.5),
    )


@pytest.fixture
def desk_pac():
    return PacParams(eps=0.05, delta=0.1)


@pytest.fixture
def point_mass_instance():
    return BanditInstance(
        arms=(PointMass(0.2), PointMass(0.7), PointMass(0.5)),
        tail=TailParams(A=1.0, beta=1.0, eps0=0.5),
    )


@pytest.fixture
def instance_file(tmp_path):
    """Write an instance description and return its path."""

    def _write(payload, name="instance.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    return _write


@pytest.fixture
def three_uniform_payload():
    return {
        "tail": {"A": 1.0, "beta": 1.0, "eps0": 0.5},
        "arms": [
            {"type": "uniform", "lo": 0.0, "hi": 1.0},
            {"type": "uniform", "lo": 0.0, "hi": 0.5},
            {"type": "uniform", "lo": 0.0, "hi": 0.5},
        ],
    }


def random_valid_instance(rng: np.random.Generator, max_arms: int = 6):
    """
    Random instance satisfying beta <= 1 and eps0 <= (4A)^(-1/beta), together with
    an (eps, delta) pair inside both constructions' validity range.
    """
    beta = 1.0 if rng.random() < 0.3 else float(rng.uniform(0.3, 1.0))
    A = float(rng.uniform(0.2, 3.0))
    eps0 = float(rng.uniform(0.2, 1.0)) * (4.0 * A) ** (-1.0 / beta)
    size = int(rng.integers(1, max_arms + 1))
    arms = []
    for _ in range(size):
        mu = float(rng.uniform(0.0, 2.0))
        kind = rng.integers(0, 3)
        if kind == 0:
            arms.append(PowerTail(mu, A, beta))
        elif kind == 1:
            arms.append(PointMass(mu))
        elif beta == 1.0:
            arms.append(Uniform(mu - 1.0 / A * float(rng.uniform(0.2, 1.0)), mu))
        else:
            # A steeper power tail still dominates A * eps^beta
            arms.append(PowerTail(mu, A * float(rng.uniform(1.0, 2.0)), beta))
    instance = BanditInstance(arms=tuple(arms), tail=TailParams(A, beta, eps0))
    eps = float(rng.uniform(0.01, 0.9)) * eps0
    delta = float(rng.uniform(0.001, 0.15))
    return instance, PacParams(eps=eps, delta=delta)


@pytest.fixture
def random_instances():
    generator = np.random.default_rng(20240601)
    return [random_valid_instance(generator) for _ in range(100)]


def rel_close(a: float, b: float, rel: float = 1e-12) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)
