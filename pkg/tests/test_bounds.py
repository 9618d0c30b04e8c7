import math

import pytest

from clinr.bounds import (
    asymptotic_bound,
    choose_t_by_estimate,
    choose_t_for_budget,
    clinr_bound,
    cznr_bound,
    default_params,
    estimate_omega_g,
    g,
    single_stage_bound,
)
from clinr.noise import NoiseModel

# expected values below were frozen from a 60-digit Decimal evaluation of
# the same closed-form expressions


class TestG:
    def test_zero_locations(self):
        assert g(0.3, 0) == 0.0

    def test_certain_fault(self):
        assert g(1.0, 1) == 1.0
        assert g(1.0, 7) == 1.0

    def test_reference_value(self):
        assert g(0.001, 1000) == pytest.approx(0.632304575229035955, rel=1e-12)

    def test_small_p_stability(self):
        # naive (1-p)**x loses digits around p ~ 1e-12; log1p form does not
        assert g(1e-12, 10**6) == pytest.approx(9.999999999995e-7, rel=1e-9)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            g(-0.1, 5)
        with pytest.raises(ValueError):
            g(0.1, -1)


class TestClinrBound:
    def test_reference_point_vacuous(self):
        rep = clinr_bound(25, 625, 5, 4, 1e-3)
        assert rep.m0 == 412
        assert rep.s0 == 125
        assert rep.p_log_bound == pytest.approx(1.753150863451638, rel=1e-12)
        assert rep.p_log_bound_clamped == 1.0

    def test_reference_point_meaningful(self):
        rep = clinr_bound(25, 625, 5, 4, 1e-4)
        assert rep.p_log_bound == pytest.approx(0.126261248032208, rel=1e-12)

    def test_omega_q(self):
        assert clinr_bound(25, 625, 5, 4, 1e-3).omega_q == pytest.approx(3.04)

    def test_zero_noise(self):
        rep = clinr_bound(4, 16, 2, 1, 0.0)
        assert rep.p_log_bound == 0.0
        assert rep.omega_g_bound == pytest.approx(10 * 4 / 8 + 2 * rep.m0 / 8)

    def test_monotone_components_in_r(self):
        # the detected term falls with r; the exposure m0 grows with r
        reps = [clinr_bound(4, 64, 2, r, 1e-3) for r in (1, 2, 4, 8)]
        for a, b in zip(reps, reps[1:]):
            assert b.m0 > a.m0
            suppressed = lambda rep: g(rep.p, 3 * rep.n + rep.s0) * 2.0 ** (-rep.r)
            assert suppressed(b) < suppressed(a)


class TestSingleStageBound:
    def test_matches_t1_numerator(self):
        a = single_stage_bound(2, 4, 1, 1e-3)
        b = clinr_bound(2, 4, 1, 1, 1e-3)
        assert a.p_log_bound == b.p_log_bound
        assert a.m0 == 17  # 3n + s + (2n+3)r = 6 + 4 + 7
        # overhead first term is halved: 5n/s vs 10n/s0
        assert a.omega_g_bound < b.omega_g_bound

    def test_zero_noise(self):
        assert single_stage_bound(3, 9, 2, 0.0).p_log_bound == 0.0


class TestCznrBound:
    def test_reference_point(self):
        rep = cznr_bound(2, 4, 1, 1, 1e-3)
        assert rep.m0 == 11
        assert rep.p_log_bound == pytest.approx(0.019167339656344355, rel=1e-12)

    def test_omega_q(self):
        assert cznr_bound(2, 4, 1, 1, 1e-3).omega_q == pytest.approx(2.5)

    def test_zero_noise_overhead(self):
        rep = cznr_bound(4, 16, 2, 2, 0.0)
        assert rep.p_log_bound == 0.0
        assert rep.omega_g_bound == pytest.approx(6 * 4 / 8 + 2 * rep.m0 / 8)


class TestAsymptotic:
    def test_zero_noise(self):
        assert asymptotic_bound(4, 16, 2, 2, 0.0) == 0.0

    def test_large_r_limit(self):
        full = asymptotic_bound(25, 125, 5, 200, 1e-4)
        assert full == pytest.approx(9 * 5 * 25 * 1e-4 / (1 - 125e-4), rel=1e-9)

    def test_reference_value(self):
        assert asymptotic_bound(25, 125, 5, 4, 1e-4) == pytest.approx(
            0.117879746835443, rel=1e-12
        )

    def test_rejects_saturated_denominator(self):
        with pytest.raises(ValueError):
            asymptotic_bound(4, 2000, 1, 1, 1e-3)


class TestDefaultParams:
    def test_square_circuit(self):
        assert default_params(25, 625) == (5, 4)

    def test_minimal_ratio_clamps(self):
        assert default_params(7, 7) == (1, 1)

    def test_ratio_four(self):
        assert default_params(5, 20) == (2, 2)

    def test_natural_log_option(self):
        t, r = default_params(25, 625, log_base=math.e)
        assert (t, r) == (5, 3)  # ln(25) ~ 3.2


class TestChooseT:
    def test_trivial_when_t1_fits(self):
        rep = clinr_bound(4, 64, 1, 1, 1e-4)
        budget = rep.omega_g_bound + 0.1
        assert choose_t_for_budget(4, 64, 1, 1e-4, budget) == 1

    def test_minimality(self):
        n, s, r, p = 4, 256, 2, 1e-4
        budget = 3.2
        t = choose_t_for_budget(n, s, r, p, budget)
        if t is not None and t > 1:
            assert clinr_bound(n, s, t, r, p).omega_g_bound <= budget
            assert clinr_bound(n, s, t - 1, r, p).omega_g_bound > budget

    def test_analytic_bound_never_fits_budget_two(self):
        # 2*m0/s0 > 2 always, so the worst-case bound cannot meet 2.0
        assert choose_t_for_budget(8, 64, 2, 1e-4, 2.0) is None

    def test_high_noise_infeasible(self):
        assert choose_t_for_budget(4, 40, 1, 0.5, 4.0) is None


class TestEstimate:
    def test_estimate_below_worst_case(self):
        model = NoiseModel.realistic(1e-3)
        est = estimate_omega_g(25, 1000, 1, 5, model, 0.5, "bell")
        worst = clinr_bound(25, 1000, 1, 5, 1e-3).omega_g_bound
        assert est < worst

    def test_choose_t_by_estimate_falls_back_to_one(self):
        model = NoiseModel.uniform(0.2)  # hopeless: nothing fits
        assert choose_t_by_estimate(4, 64, 2, model, 0.5, budget=2.0) == 1

    def test_choose_t_by_estimate_minimal(self):
        model = NoiseModel.realistic(1e-4)
        t = choose_t_by_estimate(16, 256, 4, model, 1 / 3, budget=2.0)
        assert t >= 1
        assert estimate_omega_g(16, 256, t, 4, model, 1 / 3, "bell") <= 2.0
