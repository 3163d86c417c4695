import math

import numpy as np
import pytest

from setupq.errors import (
    InsufficientReplications,
    ParameterError,
    ZeroReference,
)
from setupq.estimate import (
    collect_renewal_cycles,
    estimate,
    from_samples,
    relative_error,
    resolve_workers,
    t_ci_half_width,
)
from setupq.model import DeterministicSetup, NoSetup, SystemParams
from setupq.simengine import SimConfig

SMALL = SystemParams(k=4, rho=0.6, mu=1.0, beta=3.0)
CFG = SimConfig(horizon=2_000.0, warmup=50.0, seed=9)


class TestIntervalMachinery:
    def test_t_interval_known_values(self):
        # n = 4, sd = 1: half-width = t_{0.975,3} / 2 = 1.5920...
        values = [-1.0, 0.0, 0.0, 1.0]
        sd = np.std(values, ddof=1)
        expected = 3.182446305284263 * sd / 2.0
        assert t_ci_half_width(values) == pytest.approx(expected, rel=1e-12)

    def test_t_interval_zero_spread(self):
        assert t_ci_half_width([2.0, 2.0, 2.0]) == 0.0

    def test_needs_two_samples(self):
        with pytest.raises(InsufficientReplications):
            t_ci_half_width([1.0])

    def test_from_samples(self):
        est = from_samples("demo", [1.0, 3.0], total_events=7)
        assert est.mean == 2.0
        assert est.n == 2
        assert est.total_events == 7
        assert est.quantity == "demo"

    def test_relative_error(self):
        assert relative_error(11.0, 10.0) == pytest.approx(0.1)
        est = from_samples("demo", [8.0, 12.0])
        assert relative_error(est, 20.0) == pytest.approx(0.5)
        with pytest.raises(ZeroReference):
            relative_error(1.0, 0.0)
        with pytest.raises(ZeroReference):
            relative_error(1.0, math.inf)


class TestWorkerResolution:
    def test_explicit_wins(self, monkeypatch):
        monkeypatch.setenv("SETUPQ_MAX_WORKERS", "8")
        assert resolve_workers(3) == 3

    def test_env_fallback(self, monkeypatch):
        monkeypatch.setenv("SETUPQ_MAX_WORKERS", "6")
        assert resolve_workers() == 6

    def test_default_is_serial(self, monkeypatch):
        monkeypatch.delenv("SETUPQ_MAX_WORKERS", raising=False)
        assert resolve_workers() == 1

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            resolve_workers(0)


class TestEstimate:
    def test_needs_two_replications(self):
        with pytest.raises(InsufficientReplications):
            estimate(SMALL, DeterministicSetup(), CFG, 1)

    def test_basic_run(self):
        pair = estimate(SMALL, DeterministicSetup(), CFG, 4)
        assert pair.queue.n == 4
        assert pair.wait.n == 4
        assert pair.queue.mean > 0
        assert pair.wait.mean > 0
        assert pair.queue.ci_half_width > 0
        assert len(pair.replications) == 4
        assert pair.queue.total_events == sum(r.events for r in pair.replications)
        # the two estimates come from the same paths: Little's law within tol
        assert pair.little_gap <= pair.little_tol

    def test_deterministic_in_seed(self):
        a = estimate(SMALL, DeterministicSetup(), CFG, 3)
        b = estimate(SMALL, DeterministicSetup(), CFG, 3)
        assert a.queue == b.queue
        assert a.wait == b.wait

    def test_worker_count_does_not_change_results(self):
        serial = estimate(SMALL, DeterministicSetup(), CFG, 4, max_workers=1)
        pooled = estimate(SMALL, DeterministicSetup(), CFG, 4, max_workers=3)
        assert serial.queue == pooled.queue
        assert serial.wait == pooled.wait

    def test_replication_offset_shifts_streams(self):
        import dataclasses

        shifted = dataclasses.replace(CFG, replication_index=2)
        a = estimate(SMALL, DeterministicSetup(), CFG, 4)
        b = estimate(SMALL, DeterministicSetup(), shifted, 2)
        # b's replications are a's last two
        assert b.replications[0].mean_wait == a.replications[2].mean_wait
        assert b.replications[1].mean_wait == a.replications[3].mean_wait

    def test_matches_erlang_c_without_setup(self):
        from setupq.analytic import erlang_c_wait

        p = SystemParams(k=4, rho=0.6, mu=1.0, beta=0.0)
        pair = estimate(
            p, NoSetup(), SimConfig(horizon=10_000.0, warmup=200.0, seed=2), 6
        )
        exact = erlang_c_wait(4, 0.6, 1.0)
        assert abs(pair.wait.mean - exact) <= 3.0 * pair.wait.ci_half_width


class TestCycleCollection:
    PARAMS = SystemParams(k=10, rho=0.4, mu=1.0, beta=5.0)
    CFG = SimConfig(horizon=math.inf, seed=4)

    def test_chunking_is_part_of_the_experiment(self):
        one = collect_renewal_cycles(self.PARAMS, self.CFG, 40, n_chunks=1)
        two = collect_renewal_cycles(self.PARAMS, self.CFG, 40, n_chunks=2)
        assert one.n_cycles == two.n_cycles == 40
        # different substream layout, different samples
        assert not np.array_equal(one.cycle_lengths, two.cycle_lengths)

    def test_workers_are_not(self):
        serial = collect_renewal_cycles(
            self.PARAMS, self.CFG, 40, n_chunks=4, max_workers=1
        )
        pooled = collect_renewal_cycles(
            self.PARAMS, self.CFG, 40, n_chunks=4, max_workers=3
        )
        assert np.array_equal(serial.cycle_lengths, pooled.cycle_lengths)
        assert np.array_equal(serial.first_long_epoch, pooled.first_long_epoch)

    def test_uneven_split_preserves_total(self):
        cs = collect_renewal_cycles(self.PARAMS, self.CFG, 41, n_chunks=4)
        assert cs.n_cycles == 41
        assert len(cs.cycle_lengths) == 41

    def test_guards(self):
        with pytest.raises(ParameterError):
            collect_renewal_cycles(self.PARAMS, self.CFG, 10, n_chunks=0)
        with pytest.raises(ParameterError):
            collect_renewal_cycles(self.PARAMS, self.CFG, 3, n_chunks=4)
