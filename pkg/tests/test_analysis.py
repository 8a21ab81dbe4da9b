import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hpchem.analysis import (
    DecayFit,
    NormSeries,
    assemble_report,
    constant_state_weight,
    convolution_bound_check,
    derivative_exponent,
    expected_decay_exponents,
    fit_decay,
    flux_derivative_exponent,
    functional_M,
    functional_N,
    pks_difference_exponent,
)


class TestNormSeries:
    def test_validation(self):
        with pytest.raises(ValueError):
            NormSeries(np.array([1.0, 1.0]), np.array([1.0, 2.0]), "u_L2")
        with pytest.raises(ValueError):
            NormSeries(np.array([1.0, 2.0]), np.array([1.0]), "u_L2")
        with pytest.raises(ValueError):
            NormSeries(np.array([1.0, 2.0]), np.array([1.0, np.nan]), "u_L2")

    def test_window(self):
        s = NormSeries(np.arange(1.0, 11.0), np.ones(10), "u_L2")
        sub = s.window(3.0, 7.0)
        assert sub.times[0] == 3.0 and sub.times[-1] == 7.0


class TestFunctionals:
    def _series(self, times, values, label="u_L2"):
        return NormSeries(np.asarray(times, float), np.asarray(values, float), label)

    def test_weight_cancels_exact_decay(self):
        delta = 0.7
        t = np.concatenate([np.linspace(0.1, 0.9, 5), np.linspace(1.0, 50.0, 60)])
        v = np.where(t < 1.0, 1.0, t**-delta)
        assert functional_M(self._series(t, v), delta) == pytest.approx(1.0, rel=1e-12)

    def test_delta_zero_is_max(self):
        s = self._series([1, 2, 3], [0.3, 0.9, 0.1])
        assert functional_M(s, 0.0) == pytest.approx(0.9)

    def test_zero_series(self):
        s = self._series([1, 2, 3], [0, 0, 0])
        assert functional_M(s, 1.0) == 0.0

    def test_label_checked(self):
        s = self._series([1, 2], [1, 1], label="u_Linf")
        with pytest.raises(ValueError):
            functional_M(s, 0.5)
        functional_N(s, 0.5)
        with pytest.raises(ValueError):
            functional_N(self._series([1, 2], [1, 1], label="u_L2"), 0.5)

    def test_monotone_in_time(self):
        r = np.random.default_rng(3)
        t = np.linspace(0.5, 40.0, 200)
        v = np.abs(r.standard_normal(200)) * t**-0.3
        s = self._series(t, v)
        prev = 0.0
        for n in range(10, 201, 10):
            cur = functional_M(NormSeries(t[:n], v[:n], "u_L2"), 0.3)
            assert cur >= prev
            prev = cur


class TestFitDecay:
    def test_exact_power_law(self):
        t = np.linspace(5.0, 100.0, 60)
        s = NormSeries(t, t**-1.0, "u_L2")
        f = fit_decay(s, (5.0, 100.0))
        assert f.exponent == pytest.approx(-1.0, abs=1e-6)
        assert f.r_squared > 0.999999

    def test_exact_exponential(self):
        t = np.linspace(0.0, 20.0, 50)
        s = NormSeries(t + 1.0, 3.0 * np.exp(-0.5 * (t + 1.0)), "fast_L2")
        f = fit_decay(s, (1.0, 21.0), kind="EXP")
        assert f.exponent == pytest.approx(-0.5, abs=1e-6)

    def test_window_independence_on_exact_law(self):
        t = np.geomspace(1.0, 1000.0, 300)
        s = NormSeries(t, 2.7 * t**-0.75, "u_L2")
        for window in [(1.0, 10.0), (5.0, 500.0), (100.0, 1000.0)]:
            assert fit_decay(s, window).exponent == pytest.approx(-0.75, abs=1e-6)

    def test_too_few_samples(self):
        t = np.linspace(1.0, 2.0, 5)
        s = NormSeries(t, t, "u_L2")
        with pytest.raises(ValueError):
            fit_decay(s, (1.0, 2.0))

    def test_nonpositive_rejected(self):
        t = np.linspace(1.0, 10.0, 20)
        v = np.ones(20)
        v[5] = 0.0
        with pytest.raises(ValueError):
            fit_decay(NormSeries(t, v, "u_L2"), (1.0, 10.0))

    @settings(max_examples=20, deadline=None)
    @given(exp=st.floats(-3.0, -0.05), amp=st.floats(0.01, 100.0))
    def test_recovers_random_power_laws(self, exp, amp):
        t = np.geomspace(2.0, 200.0, 80)
        f = fit_decay(NormSeries(t, amp * t**exp, "u_L2"), (2.0, 200.0))
        assert f.exponent == pytest.approx(exp, abs=1e-6)
        assert np.exp(f.intercept) == pytest.approx(amp, rel=1e-6)


class TestConvolutionBound:
    def test_saturated_case_label_and_boundedness(self):
        out = convolution_bound_check(2.0, 1.0, np.array([2.0, 5.0, 10.0, 50.0, 200.0]))
        assert "t^-1" in out.case_label
        assert np.isfinite(out.max_ratio)
        tail = out.ratios[out.times >= 10.0]
        assert np.all(np.diff(tail) <= 1e-9)

    def test_degenerate_growth_case(self):
        # gamma = delta = 0: the integral is exactly t, envelope t^(1-0)
        out = convolution_bound_check(0.0, 0.0, np.array([2.0, 10.0, 100.0]))
        assert np.allclose(out.ratios, 1.0, rtol=1e-8)

    def test_integral_against_independent_quadrature(self):
        # oracle route: plain fixed-sample Simpson on the raw integrand
        from hpchem.analysis import _convolution_integral

        g, d = 0.75, 0.75
        for t in (2.0, 10.0, 50.0, 200.0):
            s = np.linspace(0.0, t, 200001)
            integrand = np.minimum(1.0, np.maximum(t - s, 1e-300) ** -g)
            integrand *= np.minimum(1.0, np.maximum(s, 1e-300) ** -d)
            oracle = integrate.simpson(integrand, x=s)
            assert _convolution_integral(t, g, d) == pytest.approx(oracle, rel=1e-5)

    def test_log_case(self):
        out = convolution_bound_check(1.0, 1.0, np.array([2.0, 10.0, 100.0]))
        assert "1+ln t" in out.case_label
        assert np.isfinite(out.max_ratio)

    def test_ratio_stable_under_refinement_sample(self):
        coarse = np.array([2.0, 5.0, 10.0, 50.0, 200.0])
        fine = np.geomspace(2.0, 200.0, 17)
        for g, d in [(0.25, 0.25), (0.5, 1.5), (1.0, 0.5), (2.0, 2.0)]:
            r1 = convolution_bound_check(g, d, coarse).max_ratio
            r2 = convolution_bound_check(g, d, fine).max_ratio
            assert abs(r2 - r1) <= 0.05 * r1

    def test_small_t_rejected(self):
        with pytest.raises(ValueError):
            convolution_bound_check(1.0, 1.0, np.array([1.0, 3.0]))


class TestExpectedTable:
    def test_dim1_golden(self):
        t = expected_decay_exponents(1)
        assert t["u_Linf"] == 0.5
        assert t["u_L2"] == 0.25
        assert t["v_L2"] == 0.5  # min(1/2, 3/4)
        assert t["phi_L2"] == 0.25
        assert t["gphi_Linf"] == 0.5
        assert t["D1u_L2"] == 0.5  # min(5/4, 1/2)
        assert t["D2u_L2"] == 0.75  # min(5/4, 1/4 + 1/2)
        assert t["D1v_L2"] == 0.5  # min(7/4, 1/4 + 1/4)
        assert t["D2phi_L2"] == 0.5

    def test_dim2_golden(self):
        t = expected_decay_exponents(2)
        assert t["u_L2"] == 0.5
        assert t["u_Linf"] == 1.0
        assert t["v_L2"] == 1.0  # min(1, 1)
        assert t["D1u_L2"] == 1.0  # min(3/2, 1)
        assert t["D1v_L2"] == 1.0  # min(2, 1)

    def test_dim3_golden(self):
        t = expected_decay_exponents(3)
        assert t["u_L2"] == 0.75
        assert t["u_Linf"] == 1.5
        assert t["v_L2"] == 1.25  # min(3/2, 5/4)
        assert t["D1u_L2"] == 1.5  # min(7/4, 3/2)
        assert t["D2u_L2"] == pytest.approx(1.75)  # min(3/4 + 1, 3/4 + 3/2)

    def test_recursion_consistency(self):
        for n in (1, 2, 3):
            assert derivative_exponent(n, 2) == min(
                n / 4 + 1.0, n / 4 + derivative_exponent(n, 1)
            )
            assert flux_derivative_exponent(n, 0) == min(n / 2, n / 4 + 0.5)

    def test_companion_rates(self):
        assert pks_difference_exponent(1) == 0.5
        assert pks_difference_exponent(2) == 1.0
        assert pks_difference_exponent(3) == 1.25
        assert constant_state_weight(1) == 0.25
        assert constant_state_weight(2) == 0.5
        assert constant_state_weight(3) == 0.75

    def test_bad_dim(self):
        with pytest.raises(ValueError):
            expected_decay_exponents(4)


class TestAssembleReport:
    def _fit(self, exponent, r2=0.999):
        return DecayFit(exponent=exponent, intercept=0.0, r_squared=r2, window=(10.0, 100.0))

    def test_empty(self):
        report = assemble_report({}, {"u_L2": 0.25})
        assert report.rows == [] and report.all_passed

    def test_two_sided_gate(self):
        report = assemble_report({"u_L2": self._fit(-0.3)}, {"u_L2": 0.25})
        row = report.rows[0]
        assert row.passed and row.expected == -0.25 and row.gap == pytest.approx(0.05)
        report = assemble_report({"u_L2": self._fit(-0.4)}, {"u_L2": 0.25})
        assert not report.rows[0].passed

    def test_upper_gate_allows_faster(self):
        report = assemble_report(
            {"u_Linf": self._fit(-1.4)}, {"u_Linf": 0.5}, modes={"u_Linf": "upper"}
        )
        row = report.rows[0]
        assert row.passed
        assert "faster" in row.note

    def test_unreliable_fit_noted(self):
        report = assemble_report({"u_L2": self._fit(-0.25, r2=0.9)}, {"u_L2": 0.25})
        assert report.rows[0].reliable is False
        assert "unreliable" in report.rows[0].note

    def test_unknown_labels_skipped(self):
        report = assemble_report({"zzz": self._fit(-1.0)}, {"u_L2": 0.25})
        assert report.rows == []
