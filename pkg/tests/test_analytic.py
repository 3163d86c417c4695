"""Closed-form formula tests.

Every numeric pin below was computed by an independent high-precision
(50-digit) transcription of the formulas; the float literals are those
values rounded to double precision. Property tests cover the structural
facts the formulas must satisfy regardless of constants: scale
covariance, ordering of the bounds, and normalization of the hitting-time
distribution.
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from setupq.analytic import (
    BoundConstants,
    DEFAULT_CONSTANTS,
    bounds_report,
    busy_period_integral,
    busy_period_length,
    catalan_hitting_pmf,
    erlang_c_delay_probability,
    erlang_c_wait,
    hitting_tail_lower,
    hitting_tail_upper,
    mminf_passage_mean,
    q_approx,
    q_low_r,
    q_lower,
    q_lower_mpolicy,
    q_upper,
    stopped_busy_mean_upper,
    tightness_simplified,
    welch_mm1_setup_wait,
)
from setupq.errors import (
    BufferTooLarge,
    DegenerateDrift,
    HypothesisViolated,
    InvalidLevel,
    ParameterError,
    UnstableLoad,
)
from setupq.model import SystemParams

POINT = SystemParams(k=250, rho=0.4, mu=1.0, beta=100.0)

# wide but sane parameter space for property tests
params_strategy = st.builds(
    SystemParams,
    k=st.integers(min_value=1, max_value=5000),
    rho=st.floats(min_value=0.01, max_value=0.99),
    mu=st.floats(min_value=0.01, max_value=100.0),
    beta=st.floats(min_value=1e-3, max_value=1e4),
)

region_params_strategy = st.builds(
    SystemParams,
    k=st.integers(min_value=120, max_value=5000),
    rho=st.floats(min_value=0.85, max_value=0.99),
    mu=st.floats(min_value=0.1, max_value=10.0),
    beta=st.floats(min_value=100.0, max_value=10_000.0),
).filter(
    lambda p: p.offered_load >= 100.0 and p.setup_work >= 100.0
)


class TestConstants:
    def test_default_values(self):
        c = DEFAULT_CONSTANTS
        assert c.L1 == pytest.approx(0.83554275821033350081, rel=1e-14)
        assert c.C_apx == pytest.approx(1.2533141373155002512, rel=1e-14)
        assert c.F1 == 2.12
        assert c.F2 == 3.645
        assert c.b1 == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-15)
        assert c.b2 == pytest.approx(3.2155673136318950341, rel=1e-14)
        assert c.D1 == c.b1
        assert (c.D2, c.D3) == (7.0, 6.0)
        assert (c.mpol_F2, c.mpol_F3, c.mpol_F4) == (0.23, 2.6, 7.2)

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            BoundConstants(F1=0.0)
        with pytest.raises(ParameterError):
            BoundConstants(D2=-1.0)
        with pytest.raises(ParameterError):
            BoundConstants(b1=math.nan)

    def test_rejects_inverted_growth_coefficients(self):
        with pytest.raises(ParameterError):
            BoundConstants(L1=2.0)


class TestBusyPeriod:
    def test_length(self):
        assert busy_period_length(10.0, 2.0, 1.0) == 5.0
        assert busy_period_length(0.0, 2.0, 1.0) == 0.0

    def test_integral_closed_form(self):
        # n/(mu j) * ((n+1)/2 + R/j + 1)
        assert busy_period_integral(4.0, 2.0, 6.0, 1.0) == pytest.approx(
            2.0 * (2.5 + 3.0 + 1.0)
        )
        assert busy_period_integral(0.0, 2.0, 6.0, 1.0) == 0.0

    def test_guards(self):
        with pytest.raises(DegenerateDrift):
            busy_period_length(1.0, 0.0, 1.0)
        with pytest.raises(DegenerateDrift):
            busy_period_integral(1.0, -2.0, 5.0, 1.0)
        with pytest.raises(ParameterError):
            busy_period_length(-1.0, 1.0, 1.0)


class TestQueueFormulas:
    def test_q_approx_pins(self):
        assert q_approx(SystemParams(200, 0.5, 1.0, 1000.0)) == pytest.approx(
            6266.8491188068921439, rel=1e-12
        )
        assert q_approx(POINT) == pytest.approx(626.82414313506851547, rel=1e-12)
        assert q_approx(SystemParams(400, 0.5, 1.0, 100.0)) == pytest.approx(
            886.43044567411696255, rel=1e-12
        )
        assert q_approx(SystemParams(5, 0.1, 1.0, 200.0)) == pytest.approx(
            88.887777931822666407, rel=1e-12
        )

    def test_q_approx_vanishes_without_setup(self):
        assert q_approx(SystemParams(50, 0.5, 1.0, 0.0)) == 0.0

    def test_q_low_r_pins(self):
        assert q_low_r(SystemParams(5, 0.1, 1.0, 200.0)) == pytest.approx(
            50.49504950495049505, rel=1e-12
        )
        assert q_low_r(POINT) == pytest.approx(5000.4999500049995, rel=1e-12)

    def test_q_upper_pin(self):
        assert q_upper(POINT) == pytest.approx(4482.2481183542720207, rel=1e-12)

    def test_q_lower_pin(self):
        assert q_lower(POINT) == pytest.approx(366.12343955483698873, rel=1e-12)

    def test_q_lower_positive_part_clamps_to_zero(self):
        # when the server surplus dwarfs the accumulation peak the overshoot
        # term [L1 mu beta sqrt(R) - (k - R)]+ is exactly 0 and only the
        # direct accumulation area survives in the numerator
        p = SystemParams(k=10**6, rho=1e-4, mu=1.0, beta=100.0)
        c = DEFAULT_CONSTANTS
        R = p.offered_load
        j = p.k - R
        mb = p.mu * p.beta
        assert c.L1 * mb * math.sqrt(R) - j < 0
        den = (
            2.08 * p.beta
            + c.F1 * p.beta * math.sqrt(R) / j
            + 1.5 * math.log(mb) / p.mu
            + math.log(c.F1 * c.D1) / p.mu
            + 2.0 / p.mu
            + (c.D2 + c.D3 / math.sqrt(R))
            * max(1.0 / (c.D1 * math.sqrt(mb)), 1.0 / math.sqrt(R))
            / p.mu
        )
        expected = c.L1 * mb * p.beta * math.sqrt(R) / den
        assert q_lower(p) == pytest.approx(expected, rel=1e-12)

    def test_q_lower_mpolicy_pin_and_uniformity(self):
        vals = [q_lower_mpolicy(POINT, m) for m in (0, 1, 5, 10)]
        for v in vals:
            assert v == pytest.approx(23.492335600907029478, rel=1e-12)

    def test_q_lower_mpolicy_rejects_large_reserve(self):
        with pytest.raises(BufferTooLarge):
            q_lower_mpolicy(POINT, 11)  # sqrt(R) = 10
        with pytest.raises(ParameterError):
            q_lower_mpolicy(POINT, -1)
        with pytest.raises(ParameterError):
            q_lower_mpolicy(POINT, 2.0)

    def test_tightness_pin(self):
        assert tightness_simplified(POINT) == pytest.approx(
            1001.6666666666666667, rel=1e-12
        )

    @given(params=params_strategy, scale=st.floats(min_value=0.01, max_value=100.0))
    @settings(max_examples=200)
    def test_scale_covariance(self, params, scale):
        scaled = SystemParams(
            k=params.k,
            rho=params.rho,
            mu=params.mu * scale,
            beta=params.beta / scale,
        )
        assert q_approx(scaled) == pytest.approx(q_approx(params), rel=1e-9)
        assert q_upper(scaled) == pytest.approx(q_upper(params), rel=1e-9)
        assert q_lower(scaled) == pytest.approx(q_lower(params), rel=1e-9)
        assert q_low_r(scaled) == pytest.approx(q_low_r(params), rel=1e-9)

    @given(params=region_params_strategy)
    @settings(max_examples=150)
    def test_bounds_are_ordered_in_region(self, params):
        assert q_lower(params) <= q_upper(params)

    @given(params=params_strategy)
    @settings(max_examples=200)
    def test_everything_nonnegative(self, params):
        assert q_approx(params) >= 0.0
        assert q_upper(params) > 0.0
        assert q_lower(params) > 0.0
        assert q_low_r(params) > 0.0


class TestBoundsReport:
    def test_waits_follow_littles_law(self):
        rep = bounds_report(POINT)
        rate = POINT.total_arrival_rate
        assert rep.t_approx == pytest.approx(rep.q_approx / rate, rel=1e-15)
        assert rep.t_upper == pytest.approx(rep.q_upper / rate, rel=1e-15)
        assert rep.t_lower == pytest.approx(rep.q_lower / rate, rel=1e-15)
        assert rep.tightness_ratio == pytest.approx(
            rep.q_upper / rep.q_lower, rel=1e-15
        )
        assert rep.in_region
        assert rep.flags == ()

    def test_small_system_flagged(self):
        rep = bounds_report(SystemParams(k=1, rho=0.5, mu=1.0, beta=2.0))
        assert "approx_outside_validity" in rep.flags
        assert not rep.in_region

    def test_zero_setup_report(self):
        rep = bounds_report(SystemParams(k=10, rho=0.8, mu=1.0, beta=0.0))
        assert rep.q_approx == 0.0
        assert rep.q_lower == 0.0
        assert rep.tightness_ratio == math.inf

    def test_denominator_clamp_fires_under_overridden_constants(self):
        # with default constants the cycle-length expression provably stays
        # above beta; shrinking the drift and passage constants lets the
        # negative log term win so the beta floor engages
        c = BoundConstants(F1=0.01, F2=3.645, D2=1e-9, D3=1e-9)
        p = SystemParams(k=100, rho=0.5, mu=1.0, beta=0.9)
        rep = bounds_report(p, c)
        assert "lower_denominator_clamped" in rep.flags
        assert rep.q_lower == pytest.approx(
            q_lower(p, c), rel=1e-15
        )

    @given(params=params_strategy)
    @settings(max_examples=100)
    def test_report_matches_direct_calls(self, params):
        rep = bounds_report(params)
        assert rep.q_approx == q_approx(params)
        assert rep.q_upper == q_upper(params)
        assert rep.q_low_r == q_low_r(params)


class TestClassicalFormulas:
    def test_erlang_c_pins(self):
        assert erlang_c_wait(1, 0.5, 1.0) == pytest.approx(1.0, rel=1e-13)
        assert erlang_c_wait(2, 0.5, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-13)
        assert erlang_c_wait(10, 0.8, 1.0) == pytest.approx(
            0.20459007539822176601, rel=1e-12
        )

    def test_erlang_c_single_server_matches_mm1(self):
        # M/M/1: delay probability rho, wait rho / (mu - lam)
        for rho in (0.1, 0.5, 0.9):
            assert erlang_c_delay_probability(1, rho) == pytest.approx(rho, rel=1e-12)
            assert erlang_c_wait(1, rho, 2.0) == pytest.approx(
                rho / (2.0 - 2.0 * rho) / 1.0, rel=1e-12
            )

    def test_erlang_c_large_k_is_finite_and_tiny(self):
        w = erlang_c_wait(10**6, 0.5, 1.0)
        assert 0.0 <= w < 1e-300 or w == 0.0

    @given(
        k=st.integers(min_value=1, max_value=500),
        rho=st.floats(min_value=0.05, max_value=0.95),
    )
    @settings(max_examples=150)
    def test_erlang_c_decreases_with_fleet_size(self, k, rho):
        bigger, smaller = erlang_c_wait(k, rho, 1.0), erlang_c_wait(k + 1, rho, 1.0)
        assert smaller <= bigger
        # strictness is only observable above the underflow floor
        if bigger > 1e-280:
            assert smaller < bigger
        assert 0.0 <= erlang_c_delay_probability(k, rho) < 1.0

    def test_erlang_c_guards(self):
        with pytest.raises(UnstableLoad):
            erlang_c_wait(4, 1.0, 1.0)
        with pytest.raises(ParameterError):
            erlang_c_wait(0, 0.5, 1.0)

    def test_single_server_setup_wait_pin(self):
        assert welch_mm1_setup_wait(0.5, 1.0, 10.0) == pytest.approx(
            6.8333333333333333333, rel=1e-13
        )

    def test_single_server_setup_wait_reduces_to_mm1(self):
        # beta = 0: plain M/M/1 waiting time lam / (mu (mu - lam))
        assert welch_mm1_setup_wait(0.5, 1.0, 0.0) == pytest.approx(1.0, rel=1e-13)

    def test_single_server_setup_guards(self):
        with pytest.raises(UnstableLoad):
            welch_mm1_setup_wait(1.0, 1.0, 5.0)
        with pytest.raises(ParameterError):
            welch_mm1_setup_wait(0.5, 1.0, -1.0)


class TestHittingTails:
    def test_upper_pins(self):
        assert hitting_tail_upper(3.0) == pytest.approx(
            0.67487595607605066551, rel=1e-12
        )
        assert hitting_tail_upper(10.0) == pytest.approx(
            0.23578212352890956425, rel=1e-12
        )
        assert hitting_tail_upper(100.0) == pytest.approx(
            0.058233147938323384982, rel=1e-12
        )

    def test_lower_pins(self):
        assert hitting_tail_lower(3.0) == pytest.approx(
            0.21357855693672303752, rel=1e-12
        )
        assert hitting_tail_lower(10.0) == pytest.approx(
            0.15694571388561808214, rel=1e-12
        )
        assert hitting_tail_lower(100.0) == pytest.approx(
            0.05567531806688699759, rel=1e-12
        )

    def test_domain_guard(self):
        with pytest.raises(HypothesisViolated):
            hitting_tail_upper(2.999)
        with pytest.raises(HypothesisViolated):
            hitting_tail_lower(1.0)

    @given(nu=st.floats(min_value=3.0, max_value=1e9))
    @settings(max_examples=200)
    def test_sandwich_and_range(self, nu):
        lower, upper = hitting_tail_lower(nu), hitting_tail_upper(nu)
        assert 0.0 < lower < upper

    @given(
        nu=st.floats(min_value=3.0, max_value=1e8),
        bump=st.floats(min_value=1e-3, max_value=10.0),
    )
    @settings(max_examples=150)
    def test_upper_is_decreasing(self, nu, bump):
        assert hitting_tail_upper(nu + bump) < hitting_tail_upper(nu)

    def test_stopped_busy_pin(self):
        assert stopped_busy_mean_upper(100.0, 100.0, 1.0) == pytest.approx(
            0.85788456080286535588, rel=1e-12
        )

    @given(
        beta=st.floats(min_value=0.0, max_value=1e6),
        R=st.floats(min_value=0.1, max_value=1e6),
        mu=st.floats(min_value=0.01, max_value=100.0),
        scale=st.floats(min_value=0.01, max_value=100.0),
    )
    @settings(max_examples=150)
    def test_stopped_busy_scales_like_a_time(self, beta, R, mu, scale):
        base = stopped_busy_mean_upper(beta, R, mu)
        scaled = stopped_busy_mean_upper(beta / scale, R, mu * scale)
        assert scaled == pytest.approx(base / scale, rel=1e-9)


class TestInfiniteServerPassage:
    def test_pins(self):
        assert mminf_passage_mean(1.0, 1) == pytest.approx(2.5, rel=1e-12)
        assert mminf_passage_mean(100.0, 1) == pytest.approx(
            0.14200059640116970399, rel=1e-9
        )
        assert mminf_passage_mean(100.0, 5) == pytest.approx(
            0.19734060176246348693, rel=1e-9
        )
        assert mminf_passage_mean(100.0, 10) == pytest.approx(
            0.33101848471500703345, rel=1e-9
        )
        assert mminf_passage_mean(400.0, 20) == pytest.approx(
            0.16950280777430434572, rel=1e-9
        )

    def test_tiny_system_closed_form(self):
        # R = 1, h = 1: from 2 jobs, exp-rate-2 departures, passage mean
        # (1 + R + R^2/2) / (R^2/2) / 2 = 2.5 / 1 ... direct small sum
        assert mminf_passage_mean(1.0, 1, 2.0) == pytest.approx(1.25, rel=1e-12)

    def test_level_guards(self):
        with pytest.raises(InvalidLevel):
            mminf_passage_mean(100.0, 0)
        with pytest.raises(InvalidLevel):
            mminf_passage_mean(100.0, 11)
        with pytest.raises(InvalidLevel):
            mminf_passage_mean(100.0, 1.0)

    @given(R=st.floats(min_value=100.0, max_value=1e5))
    @settings(max_examples=100)
    def test_passage_below_documented_cap(self, R):
        # every admissible level clears D2 / (mu sqrt(R)) with room
        h_max = int(math.floor(math.sqrt(R)))
        worst = max(
            mminf_passage_mean(R, h) for h in (1, h_max // 2 or 1, h_max)
        )
        assert worst <= 7.0 / math.sqrt(R)

    @given(
        R=st.floats(min_value=4.0, max_value=1e4),
        h=st.integers(min_value=1, max_value=10),
    )
    @settings(max_examples=150)
    def test_passage_increases_with_level(self, R, h):
        assume(h + 1 <= math.sqrt(R))
        assert mminf_passage_mean(R, h + 1) > mminf_passage_mean(R, h)


class TestCatalanPmf:
    def test_first_terms(self):
        assert catalan_hitting_pmf(0.3, 0) == pytest.approx(0.7, rel=1e-14)
        assert catalan_hitting_pmf(0.3, 1) == pytest.approx(
            0.7 * 0.7 * 0.3, rel=1e-12
        )
        assert catalan_hitting_pmf(0.3, 2) == pytest.approx(
            2 * 0.3**2 * 0.7**3, rel=1e-12
        )

    def test_partial_sum_pin_at_critical_p(self):
        # slow sqrt decay: the first 601 terms capture this exact mass
        total = float(np.sum(catalan_hitting_pmf(0.5, np.arange(601))))
        assert total == pytest.approx(0.97699101292213658748, rel=1e-10)

    def test_sums_for_subcritical_p(self):
        for p in (0.1, 0.3):
            total = float(np.sum(catalan_hitting_pmf(p, np.arange(601))))
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_sum_for_supercritical_p(self):
        total = float(np.sum(catalan_hitting_pmf(0.7, np.arange(601))))
        assert total == pytest.approx(3.0 / 7.0, abs=1e-12)

    def test_degenerate_steps(self):
        assert catalan_hitting_pmf(0.0, 0) == 1.0
        assert catalan_hitting_pmf(0.0, 3) == 0.0
        assert catalan_hitting_pmf(1.0, 0) == 0.0

    def test_scalar_and_array_agree(self):
        arr = catalan_hitting_pmf(0.4, np.arange(5))
        for ell in range(5):
            assert arr[ell] == pytest.approx(
                catalan_hitting_pmf(0.4, ell), rel=1e-15
            )

    def test_guards(self):
        with pytest.raises(ParameterError):
            catalan_hitting_pmf(1.5, 0)
        with pytest.raises(ParameterError):
            catalan_hitting_pmf(0.5, -1)
        with pytest.raises(ParameterError):
            catalan_hitting_pmf(0.5, np.array([0.5, 1.5]))

    @given(p=st.floats(min_value=0.01, max_value=0.99))
    @settings(max_examples=100)
    def test_mass_never_exceeds_its_target(self, p):
        target = 1.0 if p <= 0.5 else (1.0 - p) / p
        total = float(np.sum(catalan_hitting_pmf(p, np.arange(400))))
        assert 0.0 < total <= target + 1e-12
