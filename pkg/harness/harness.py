"""
Monte-Carlo trials and reproduction of the two worked examples.

Each trial draws from its own generator seeded from (master_seed, trial index),
so trials can run in any order or process and the report stays the same.
"""

import concurrent.futures
import logging
import math
import multiprocessing
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import stats

from bandit.algorithms import (
    MaxCbConfig,
    MeConfig,
    PacParams,
    per_arm_cap,
    resolve_algorithm,
    run_max_cb,
    run_maximal_eliminator,
    run_unified_arm,
    unified_sample_count,
)
from bandit.bandit_env import BanditInstance
from bounds.bounds import case_comparison
from core.errors import ParameterError, SampleBudgetError, TrialExecutionError
from rewards.reward_models import PowerTail, TailParams

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64

# Worked example constants: 10^4 power-tail arms, A=0.01, beta=1, eps=1e-4, delta=1e-3
EXAMPLE_ARMS = 10_000
EXAMPLE_A = 0.01
EXAMPLE_BETA = 1.0
EXAMPLE_EPS = 1e-4
EXAMPLE_DELTA = 1e-3
# Largest eps0 with eps0 <= (4A)^(-1/beta)
EXAMPLE_EPS0 = 25.0
EXAMPLE_TOLERANCE = 0.01

PUBLISHED_VALUES = {
    "example_1": {"thm2_core": 3.52e8, "thm3_lower": 1.59e10, "thm4_upper": 6.9e10, "thm1_lower": None},
    "example_2": {"thm2_core": 1.56e12, "thm4_upper": 6.9e10, "thm3_lower": None, "thm1_lower": None},
}
EXPECTED_VERDICTS = {"example_1": "multi_arm", "example_2": "unified"}


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed for one trial, derived from the master seed and the trial index."""
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    return int(sequence.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ExperimentSpec:
    instance: BanditInstance
    pac: PacParams
    algorithm: str
    trials: int
    master_seed: int
    workers: int = 1
    max_samples: Optional[int] = None
    clamp_L: bool = True
    literal_argument: bool = False

    def __post_init__(self):
        object.__setattr__(self, "algorithm", resolve_algorithm(self.algorithm))
        if self.trials < 1:
            raise ParameterError(f"must be >= 1, got {self.trials}", "trials")
        if self.workers < 1:
            raise ParameterError(f"must be >= 1, got {self.workers}", "workers")
        if not (0 <= self.master_seed < SEED_LIMIT):
            raise ParameterError(f"must be a 64-bit unsigned integer, got {self.master_seed}", "seed")


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    seed: int
    value: float
    total_samples: int
    success: bool
    wall_clock: float = 0.0


@dataclass
class CorrectnessReport:
    algorithm: str
    trials: int
    master_seed: int
    eps: float
    delta: float
    mu_star: float
    success_rate: float
    wilson_ci_95: Tuple[float, float]
    mean_T: float
    max_T: int
    bound_violations: int
    sample_cap: Optional[int]
    mean_shortfall: float
    passed: bool
    per_trial_csv_path: Optional[str] = None
    wall_clock: float = 0.0
    outcomes: List[TrialOutcome] = field(default_factory=list, repr=False)

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        payload = {
            "algorithm": self.algorithm,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "eps": self.eps,
            "delta": self.delta,
            "mu_star": self.mu_star,
            "success_rate": self.success_rate,
            "wilson_ci_95": list(self.wilson_ci_95),
            "mean_T": self.mean_T,
            "max_T": self.max_T,
            "bound_violations": self.bound_violations,
            "sample_cap": self.sample_cap,
            "mean_shortfall": self.mean_shortfall,
            "passed": self.passed,
            "per_trial_csv_path": self.per_trial_csv_path,
        }
        if include_timing:
            payload["wall_clock"] = self.wall_clock
        return payload


AlgorithmConfig = Union[MaxCbConfig, MeConfig, None]


def algorithm_config(spec: ExperimentSpec) -> AlgorithmConfig:
    """
    Constants shared by every trial of spec.

    Raises:
        ParameterError: The (eps, delta) pair gives the algorithm no valid confidence radius.
    """
    tail = spec.instance.tail
    if spec.algorithm == "max_cb":
        return MaxCbConfig.from_params(spec.instance.size, tail, spec.pac, spec.clamp_L)
    if spec.algorithm == "maximal_eliminator":
        return MeConfig.from_params(spec.instance.size, tail, spec.pac, literal_argument=spec.literal_argument)
    return None


def _sample_cap(spec: ExperimentSpec, config: AlgorithmConfig) -> Optional[int]:
    """Deterministic cap on T: pathwise for Max-CB, exact for the unified arm, none for ME."""
    tail = spec.instance.tail
    if spec.algorithm == "max_cb":
        return spec.instance.size * per_arm_cap(config.L, tail, spec.pac)
    if spec.algorithm == "unified_arm":
        return unified_sample_count(spec.instance.size, tail, spec.pac)
    return None


def _violates_cap(algorithm: str, total: int, cap: Optional[int]) -> bool:
    if cap is None:
        return False
    if algorithm == "unified_arm":
        return total != cap
    return total > cap


def run_single_trial(spec: ExperimentSpec, trial: int, config: AlgorithmConfig = None) -> TrialOutcome:
    seed = trial_seed(spec.master_seed, trial)
    rng = np.random.default_rng(seed)
    instance, pac = spec.instance, spec.pac
    if config is None and spec.algorithm != "unified_arm":
        config = algorithm_config(spec)
    if spec.algorithm == "max_cb":
        result = run_max_cb(instance, pac, rng, config)
    elif spec.algorithm == "maximal_eliminator":
        result = run_maximal_eliminator(instance, pac, rng, config)
    else:
        result = run_unified_arm(instance, pac, rng, spec.max_samples)
    success = result.value > instance.mu_star() - pac.eps
    logger.debug(f"Trial {trial}: V={result.value:.6g} T={result.total_samples} success={success}")
    return TrialOutcome(trial, seed, result.value, result.total_samples, success, result.wall_clock)


class _TrialFailure(Exception):
    def __init__(self, trial: int, cause: Exception):
        self.trial = trial
        self.cause = cause
        super().__init__(f"trial {trial}: {cause}")


_worker_spec: Optional[ExperimentSpec] = None
_worker_config: AlgorithmConfig = None


def _init_worker(spec: ExperimentSpec, config: AlgorithmConfig):
    global _worker_spec, _worker_config
    _worker_spec = spec
    _worker_config = config


def _run_worker_trial(trial: int) -> TrialOutcome:
    return run_single_trial(_worker_spec, trial, _worker_config)


def _start_method() -> str:
    """fork on POSIX when called from the main thread, otherwise forkserver or spawn."""
    methods = multiprocessing.get_all_start_methods()
    if threading.current_thread() is not threading.main_thread():
        return "forkserver" if "forkserver" in methods else "spawn"
    if os.name == "posix" and "fork" in methods:
        return "fork"
    return "spawn"


def _collect_serial(spec: ExperimentSpec, config: AlgorithmConfig, done: Dict[int, TrialOutcome]):
    for trial in range(spec.trials):
        try:
            done[trial] = run_single_trial(spec, trial, config)
        except Exception as e:
            raise _TrialFailure(trial, e) from e


def _collect_parallel(spec: ExperimentSpec, config: AlgorithmConfig, done: Dict[int, TrialOutcome]):
    context = multiprocessing.get_context(_start_method())
    with concurrent.futures.ProcessPoolExecutor(
        max_workers=min(spec.workers, spec.trials),
        mp_context=context,
        initializer=_init_worker,
        initargs=(spec, config),
    ) as executor:
        futures = {executor.submit(_run_worker_trial, trial): trial for trial in range(spec.trials)}
        for future in concurrent.futures.as_completed(futures):
            trial = futures[future]
            try:
                done[trial] = future.result()
            except Exception as e:
                for pending in futures:
                    pending.cancel()
                raise _TrialFailure(trial, e) from e


def wilson_interval(successes: int, trials: int) -> Tuple[float, float]:
    ci = stats.binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def summarize(spec: ExperimentSpec, outcomes: List[TrialOutcome], cap: Optional[int]) -> CorrectnessReport:
    successes = sum(o.success for o in outcomes)
    n = len(outcomes)
    rate = successes / n
    totals = [o.total_samples for o in outcomes]
    mu_star = spec.instance.mu_star()
    violations = sum(_violates_cap(spec.algorithm, t, cap) for t in totals)
    sigma = math.sqrt(rate * (1.0 - rate) / n)
    passed = rate + 3.0 * sigma >= 1.0 - spec.pac.delta and violations == 0
    return CorrectnessReport(
        algorithm=spec.algorithm,
        trials=n,
        master_seed=spec.master_seed,
        eps=spec.pac.eps,
        delta=spec.pac.delta,
        mu_star=mu_star,
        success_rate=rate,
        wilson_ci_95=wilson_interval(successes, n),
        mean_T=math.fsum(totals) / n,
        max_T=max(totals),
        bound_violations=violations,
        sample_cap=cap,
        mean_shortfall=math.fsum(mu_star - o.value for o in outcomes) / n,
        passed=passed,
        outcomes=list(outcomes),
    )


def run_trials(spec: ExperimentSpec, per_trial_csv: Optional[str] = None) -> CorrectnessReport:
    """
    Run spec.trials independent executions and aggregate them.

    Args:
        spec: Experiment description.
        per_trial_csv: Optional path for the per-trial rows; also used to derive the
            partial-results path when a trial fails.

    Raises:
        ParameterError: The algorithm has no valid confidence radius for (eps, delta).
        SampleBudgetError: A unified-arm run would need more than spec.max_samples draws.
        TrialExecutionError: A trial raised; completed trials are written next to per_trial_csv.
    """
    from harness.results_io import write_trial_rows

    spec.pac.warnings_for(spec.instance.tail)
    config = algorithm_config(spec)
    cap = _sample_cap(spec, config)
    if spec.algorithm == "unified_arm" and spec.max_samples is not None and cap > spec.max_samples:
        raise SampleBudgetError(cap, spec.max_samples)

    logger.info(
        f"Running {spec.trials} trials of {spec.algorithm} on {spec.instance.size} arms "
        f"(eps={spec.pac.eps:g}, delta={spec.pac.delta:g}, workers={spec.workers})"
    )
    started = time.perf_counter()
    done: Dict[int, TrialOutcome] = {}
    try:
        if spec.workers > 1 and spec.trials > 1:
            _collect_parallel(spec, config, done)
        else:
            _collect_serial(spec, config, done)
    except _TrialFailure as failure:
        partial_path = None
        if done:
            partial_path = (per_trial_csv or f"maxbandit_{spec.algorithm}_{spec.master_seed}.csv") + ".partial"
            write_trial_rows([done[t] for t in sorted(done)], partial_path)
        logger.error(f"Trial {failure.trial} failed: {failure.cause}")
        raise TrialExecutionError(failure.trial, str(failure.cause), partial_path) from failure.cause

    outcomes = [done[t] for t in sorted(done)]
    report = summarize(spec, outcomes, cap)
    report.wall_clock = time.perf_counter() - started
    if per_trial_csv:
        write_trial_rows(outcomes, per_trial_csv)
        report.per_trial_csv_path = per_trial_csv
    logger.info(
        f"{spec.algorithm}: success_rate={report.success_rate:.4f} mean_T={report.mean_T:.1f} "
        f"violations={report.bound_violations} passed={report.passed}"
    )
    return report


def build_example_instance(example: int, eps0: float = EXAMPLE_EPS0) -> BanditInstance:
    """
    Example 1: arm 1 tops out at 0.9, the remaining arms at 0.1.
    Example 2: arm 1 tops out at 0.1, the remaining arms at 0.9.
    """
    if example not in (1, 2):
        raise ParameterError(f"must be 1 or 2, got {example}", "example")
    first, rest = (0.9, 0.1) if example == 1 else (0.1, 0.9)
    arms = [PowerTail(first, EXAMPLE_A, EXAMPLE_BETA)]
    arms += [PowerTail(rest, EXAMPLE_A, EXAMPLE_BETA)] * (EXAMPLE_ARMS - 1)
    return BanditInstance(arms=tuple(arms), tail=TailParams(EXAMPLE_A, EXAMPLE_BETA, eps0))


@dataclass(frozen=True)
class ExampleRow:
    example: str
    quantity: str
    computed: float
    published: Optional[float]
    relative_error: Optional[float]
    within_tolerance: Optional[bool]


@dataclass
class ExamplesTable:
    rows: List[ExampleRow]
    verdicts: Dict[str, str] = field(default_factory=dict)
    eps0: float = EXAMPLE_EPS0

    @property
    def passed(self) -> bool:
        rows_ok = all(r.within_tolerance is not False for r in self.rows)
        verdicts_ok = all(self.verdicts.get(name) == want for name, want in EXPECTED_VERDICTS.items())
        return rows_ok and verdicts_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps0": self.eps0,
            "rows": [r.__dict__.copy() for r in self.rows],
            "verdicts": dict(self.verdicts),
            "passed": self.passed,
        }


def reproduce_examples(eps0: float = EXAMPLE_EPS0) -> ExamplesTable:
    """Evaluate the bounds of both worked examples against their published values."""
    pac = PacParams(eps=EXAMPLE_EPS, delta=EXAMPLE_DELTA)
    rows: List[ExampleRow] = []
    verdicts: Dict[str, str] = {}
    for number in (1, 2):
        name = f"example_{number}"
        comparison = case_comparison(build_example_instance(number, eps0), pac)
        verdicts[name] = comparison.verdict
        report = comparison.report
        for quantity, published in PUBLISHED_VALUES[name].items():
            computed = getattr(report, quantity)
            if published is None:
                rows.append(ExampleRow(name, quantity, computed, None, None, None))
                continue
            error = abs(computed - published) / published
            rows.append(ExampleRow(name, quantity, computed, published, error, error <= EXAMPLE_TOLERANCE))
    table = ExamplesTable(rows=rows, verdicts=verdicts, eps0=eps0)
    logger.info(f"Example reproduction (eps0={eps0:g}): {'pass' if table.passed else 'FAIL'}")
    return table
