import csv
import math
import multiprocessing
import threading

import pytest

import harness.harness as harness_module
from bandit.algorithms import PacParams
from bandit.bandit_env import BanditInstance
from core.errors import ParameterError, SampleBudgetError, TrialExecutionError
from harness.harness import (
    ExperimentSpec,
    _start_method,
    reproduce_examples,
    run_single_trial,
    run_trials,
    trial_seed,
    wilson_interval,
)
from rewards.reward_models import PointMass, TailParams


def _fingerprint(report):
    return [(o.trial, o.seed, o.value, o.total_samples, o.success) for o in report.outcomes]


class TestSeeds:
    def test_deterministic(self):
        assert trial_seed(7, 3) == trial_seed(7, 3)

    def test_distinct(self):
        seeds = {trial_seed(7, t) for t in range(1000)}
        assert len(seeds) == 1000
        assert trial_seed(7, 0) != trial_seed(8, 0)

    def test_fits_64_bits(self):
        assert 0 <= trial_seed(2**64 - 1, 5) < 2**64


class TestExperimentSpec:
    def test_resolves_alias(self, three_uniform_instance, desk_pac):
        spec = ExperimentSpec(three_uniform_instance, desk_pac, "me", trials=1, master_seed=0)
        assert spec.algorithm == "maximal_eliminator"

    @pytest.mark.parametrize("trials, workers", [(0, 1), (5, 0)])
    def test_rejects_counts(self, three_uniform_instance, desk_pac, trials, workers):
        with pytest.raises(ParameterError):
            ExperimentSpec(three_uniform_instance, desk_pac, "unified", trials=trials, master_seed=0, workers=workers)


def test_wilson_interval():
    low, high = wilson_interval(50, 100)
    assert low == pytest.approx(0.4038, abs=1e-3)
    assert high == pytest.approx(0.5962, abs=1e-3)


def test_single_trial_reproducible(three_uniform_instance, desk_pac):
    spec = ExperimentSpec(three_uniform_instance, desk_pac, "max-cb", trials=10, master_seed=123)
    a = run_single_trial(spec, 4)
    b = run_single_trial(spec, 4)
    assert (a.seed, a.value, a.total_samples) == (b.seed, b.value, b.total_samples)


def test_point_masses_always_succeed(point_mass_instance, desk_pac):
    spec = ExperimentSpec(point_mass_instance, desk_pac, "unified", trials=50, master_seed=1)
    report = run_trials(spec)
    assert report.success_rate == 1.0
    assert report.mean_shortfall == 0.0
    assert report.bound_violations == 0
    assert report.max_T == report.sample_cap
    assert report.passed


def test_budget_refused_before_running(three_uniform_instance, desk_pac):
    spec = ExperimentSpec(three_uniform_instance, desk_pac, "unified", trials=5, master_seed=0, max_samples=10)
    with pytest.raises(SampleBudgetError) as info:
        run_trials(spec)
    assert info.value.required == 140


def test_invalid_eliminator_parameters_fail_before_trials(tmp_path):
    # ln(12 ln(1 + ln(1/0.99) / 0.25)) - ln(0.99) is about -0.739
    instance = BanditInstance(arms=(PointMass(1.0),), tail=TailParams(1.0, 1.0, 0.5))
    spec = ExperimentSpec(instance, PacParams(eps=0.25, delta=0.99), "me", trials=4, master_seed=0)
    path = tmp_path / "trials.csv"
    with pytest.raises(ParameterError, match="L_me"):
        run_trials(spec, str(path))
    assert not path.exists()
    assert not (tmp_path / "trials.csv.partial").exists()


class TestStartMethod:
    def test_fork_from_main_thread(self):
        if "fork" not in multiprocessing.get_all_start_methods():
            pytest.skip("fork unavailable")
        assert _start_method() == "fork"

    def test_no_fork_from_worker_thread(self):
        chosen = []
        worker = threading.Thread(target=lambda: chosen.append(_start_method()))
        worker.start()
        worker.join()
        assert chosen[0] in {"forkserver", "spawn"}


def test_parallel_matches_serial(three_uniform_instance, desk_pac):
    serial = run_trials(ExperimentSpec(three_uniform_instance, desk_pac, "me", trials=40, master_seed=99, workers=1))
    parallel = run_trials(ExperimentSpec(three_uniform_instance, desk_pac, "me", trials=40, master_seed=99, workers=8))
    assert _fingerprint(serial) == _fingerprint(parallel)
    assert serial.to_dict(include_timing=False) == parallel.to_dict(include_timing=False)


def test_per_trial_csv(tmp_path, three_uniform_instance, desk_pac):
    path = tmp_path / "trials.csv"
    spec = ExperimentSpec(three_uniform_instance, desk_pac, "unified", trials=12, master_seed=3)
    report = run_trials(spec, str(path))
    assert report.per_trial_csv_path == str(path)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["trial", "seed", "V", "T", "success"]
    assert [int(r[0]) for r in rows[1:]] == list(range(12))
    assert all(r[3] == "140" for r in rows[1:])


def test_failed_trial_writes_partial(tmp_path, monkeypatch, three_uniform_instance, desk_pac):
    original = harness_module.run_single_trial

    def flaky(spec, trial, config=None):
        if trial == 3:
            raise RuntimeError("worker crashed")
        return original(spec, trial, config)

    monkeypatch.setattr(harness_module, "run_single_trial", flaky)
    path = tmp_path / "trials.csv"
    spec = ExperimentSpec(three_uniform_instance, desk_pac, "unified", trials=10, master_seed=0)
    with pytest.raises(TrialExecutionError) as info:
        run_trials(spec, str(path))
    assert info.value.trial == 3
    assert info.value.partial_path == str(path) + ".partial"
    with open(info.value.partial_path, newline="") as f:
        assert len(list(csv.reader(f))) == 4
    assert not path.exists()


class TestExamples:
    def test_reproduction_passes(self):
        table = reproduce_examples()
        assert table.passed
        assert table.verdicts == {"example_1": "multi_arm", "example_2": "unified"}

    def test_rows(self):
        table = reproduce_examples()
        checked = [r for r in table.rows if r.published is not None]
        assert len(checked) == 5
        assert all(r.relative_error <= 0.01 for r in checked)
        extra = [r for r in table.rows if r.quantity == "thm1_lower" and r.example == "example_1"]
        assert extra[0].computed == pytest.approx(8.176e5, rel=1e-3)


def _plus_three_sigma(report):
    return report.success_rate + 3.0 * math.sqrt(report.success_rate * (1.0 - report.success_rate) / report.trials)


@pytest.mark.slow
@pytest.mark.parametrize("algorithm", ["max-cb", "me", "unified"])
def test_three_uniform_acceptance(three_uniform_instance, desk_pac, algorithm):
    spec = ExperimentSpec(three_uniform_instance, desk_pac, algorithm, trials=1000, master_seed=20240601, workers=4)
    report = run_trials(spec)
    assert _plus_three_sigma(report) >= 0.9
    assert report.bound_violations == 0
    assert report.passed


@pytest.mark.slow
def test_eliminator_sample_count_against_max_cb(three_uniform_instance, desk_pac):
    reports = {
        name: run_trials(ExperimentSpec(three_uniform_instance, desk_pac, name, trials=300, master_seed=1, workers=4))
        for name in ("max-cb", "me")
    }
    assert reports["me"].mean_T <= 4.0 * reports["max-cb"].mean_T
    assert _plus_three_sigma(reports["me"]) >= 0.9
