"""Vector fields, chart conversions, first integrals, and closed-form
profiles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plap.params import ProblemParams, derive_constants, m_ell_point
from plap.systems import (
    ChartDomainError,
    ChartState,
    OracleConstraintError,
    PhaseState,
    ProfileSample,
    J_N,
    J_alpha,
    convert,
    field,
    from_profile,
    invert,
    oracle,
    phi_Y,
    profile_residual,
    profile_state_rates,
    to_profile,
)


P_236_1 = ProblemParams(2, 3.0, -6.0, 1)


class TestField:
    def test_s_field_on_positive_Y_axis(self):
        params = ProblemParams(2, 3.0, 1.0, 1)
        dy, dY = field("S", (0.0, 4.0), params)
        assert dy == pytest.approx(-2.0, abs=1e-14)
        assert dY == pytest.approx(-22.0, abs=1e-14)

    def test_s_field_vanishes_at_flat_point(self):
        m = m_ell_point(P_236_1)
        assert m == pytest.approx((1.0 / 15.0, -1.0 / 25.0), abs=1e-15)
        rate = field("S", m, P_236_1)
        assert np.max(np.abs(rate)) <= 1e-14

    def test_s_field_on_positive_y_axis(self):
        params = ProblemParams(2, 3.0, -5.0, -1)
        dc = derive_constants(params)
        phi = 0.37
        dy, dY = field("S", (phi, 0.0), params)
        assert dy == pytest.approx(-dc.gamma * phi, rel=1e-14)
        assert dY == pytest.approx(params.epsilon * params.alpha * phi, rel=1e-14)

    def test_domain_errors(self):
        params = ProblemParams(2, 3.0, 1.0, 1)
        with pytest.raises(ChartDomainError):
            field("Q", (0.5, 0.0), params)
        with pytest.raises(ChartDomainError):
            field("nope", (0.0, 0.0), params)
        with pytest.raises(ChartDomainError):
            field("S", (float("nan"), 0.0), params)

    def test_all_charts_agree_through_conversion(self):
        # chain rule: chart rates must equal the pushforward of the S rates
        params = ProblemParams(2, 3.0, -1.3, -1)
        y, Y = 0.31, -0.22
        dy, dY = field("S", (y, Y), params)
        h = 1e-7
        for chart in ("Q", "P"):
            c0 = convert(PhaseState(0.0, y, Y), chart, params)
            c1 = convert(PhaseState(h, y + h * dy, Y + h * dY), chart, params)
            fd = (np.array(c1.coords) - np.array(c0.coords)) / h
            rate = field(chart, c0.coords, params)
            assert np.max(np.abs(fd - rate)) <= 1e-5 * max(1.0, np.max(np.abs(rate)))

    def test_rescaled_charts_agree_through_conversion(self):
        # d tau = g s d nu relates the R-chart clock to tau
        params = ProblemParams(2, 3.0, -1.3, -1)
        y, Y = 0.31, -0.22
        dy, dY = field("S", (y, Y), params)
        h = 1e-7
        dc = derive_constants(params)
        for chart in ("R", "R_beta"):
            c0 = convert(PhaseState(0.0, y, Y), chart, params)
            c1 = convert(PhaseState(h, y + h * dy, Y + h * dY), chart, params)
            fd = (np.array(c1.coords) - np.array(c0.coords)) / h
            g, second = c0.coords
            s = second * dc.beta if chart == "R_beta" else second
            rate = np.array(field(chart, c0.coords, params)) / (g * s)
            assert np.max(np.abs(fd - rate)) <= 1e-5 * max(1.0, np.max(np.abs(rate)))


class TestConversions:
    def test_slope_chart_example(self):
        c = convert(PhaseState(0.0, 1.0, -1.0), "Q", ProblemParams(2, 3.0, 1.0, 1))
        assert c.coords == pytest.approx((-1.0, -1.0), abs=1e-14)

    def test_flat_point_slope_coordinates(self):
        m = m_ell_point(P_236_1)
        dc = derive_constants(P_236_1)
        c = convert(PhaseState(0.0, *m), "Q", P_236_1)
        expected = (-dc.gamma,
                    P_236_1.epsilon * (P_236_1.alpha + dc.gamma) / (P_236_1.N + dc.gamma))
        assert c.coords == pytest.approx(expected, rel=1e-12)
        r = convert(PhaseState(0.0, *m), "R", P_236_1)
        assert r.coords[0] == pytest.approx(1.0 / dc.gamma, rel=1e-12)

    @given(
        y=st.floats(min_value=-5.0, max_value=5.0).filter(lambda v: abs(v) > 1e-3),
        Y=st.floats(min_value=-5.0, max_value=5.0).filter(lambda v: abs(v) > 1e-3),
        chart=st.sampled_from(["Q", "P", "R", "R_beta"]),
    )
    @settings(max_examples=400, deadline=None)
    def test_round_trip_identity(self, y, Y, chart):
        params = ProblemParams(2, 3.0, -1.5, -1)
        state = PhaseState(0.7, y, Y)
        try:
            c = convert(state, chart, params)
            back = invert(c, params, sign_y=1 if y > 0 else -1)
        except ChartDomainError:
            return
        assert back.y == pytest.approx(y, rel=1e-12, abs=1e-12)
        assert back.Y == pytest.approx(Y, rel=1e-12, abs=1e-12)

    def test_convert_errors(self):
        params = ProblemParams(2, 3.0, 1.0, 1)
        with pytest.raises(ChartDomainError):
            convert(PhaseState(0.0, 0.0, 1.0), "Q", params)
        with pytest.raises(ChartDomainError):
            convert(PhaseState(0.0, 1.0, 0.0), "P", params)
        with pytest.raises(ChartDomainError):
            invert(ChartState("Q", (1.0, -1.0), 0.0), params)


class TestProfileMap:
    def test_simple_point(self):
        s = to_profile(PhaseState(0.0, 2.0, 0.0), ProblemParams(2, 3.0, 1.0, 1))
        assert (s.r, s.w, s.dw) == pytest.approx((1.0, 2.0, 0.0), abs=1e-14)

    @given(
        tau=st.floats(min_value=-3.0, max_value=3.0),
        y=st.floats(min_value=-4.0, max_value=4.0),
        Y=st.floats(min_value=-4.0, max_value=4.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_round_trip(self, tau, y, Y):
        params = ProblemParams(2, 3.0, -1.5, -1)
        back = from_profile(to_profile(PhaseState(tau, y, Y), params), params)
        assert back.tau == pytest.approx(tau, abs=1e-12)
        assert back.y == pytest.approx(y, rel=1e-10, abs=1e-12)
        assert back.Y == pytest.approx(Y, rel=1e-10, abs=1e-12)

    def test_barenblatt_lift_sits_on_diagonal(self):
        params = ProblemParams(2, 3.0, 2.0, 1)
        sol = oracle("barenblatt", params, free_constant=1.0)
        for r in (0.2, 0.7, 1.3):
            st_ = from_profile(sol.sample(r), params)
            assert st_.Y == pytest.approx(params.epsilon * st_.y, rel=1e-10)


ORACLE_CASES = [
    ("U_flat", ProblemParams(2, 3.0, -6.0, 1), 1.0),
    ("barenblatt", ProblemParams(2, 3.0, 2.0, 1), 1.0),
    ("p_harmonic", ProblemParams(4, 3.0, 0.5, 1), 1.0),
    ("quadratic", ProblemParams(2, 3.0, -1.5, 1), 1.0),
    ("alpha_zero", ProblemParams(2, 3.0, 0.0, 1), 1.0),
    ("n1_special", ProblemParams(1, 3.0, -2.0, 1), -1.0),
]


class TestOracles:
    def test_barenblatt_closed_form(self):
        params = ProblemParams(2, 3.0, 2.0, 1)
        sol = oracle("barenblatt", params, free_constant=1.0)
        r = np.linspace(0.01, 2.5, 200)
        expected = np.clip(1.0 - r ** 1.5 / 3.0, 0.0, None) ** 2
        assert np.max(np.abs(sol(r) - expected)) <= 1e-12
        assert sol.edge == pytest.approx(3.0 ** (2.0 / 3.0), rel=1e-14)

    def test_flat_closed_form(self):
        sol = oracle("U_flat", P_236_1)
        r = np.linspace(0.1, 3.0, 50)
        assert np.max(np.abs(sol(r) - r ** 3 / 15.0)) <= 1e-12

    def test_n1_special_closed_form(self):
        params = ProblemParams(1, 3.0, -2.0, 1)
        sol = oracle("n1_special", params, free_constant=-1.0)
        r = np.linspace(0.1, 6.0, 60)
        expected = np.clip(4.0 - r, 0.0, None) ** 2
        assert np.max(np.abs(sol(r) - expected)) <= 1e-12
        assert sol.edge == pytest.approx(4.0, rel=1e-14)

    def test_alpha_zero_normalization(self):
        sol = oracle("alpha_zero", ProblemParams(2, 3.0, 0.0, 1))
        assert float(sol(np.array([1.0]))[0]) == pytest.approx(0.0, abs=1e-12)

    def test_constraint_errors(self):
        with pytest.raises(OracleConstraintError):
            oracle("barenblatt", ProblemParams(2, 3.0, 1.0, 1))
        with pytest.raises(OracleConstraintError):
            oracle("n1_special", ProblemParams(2, 3.0, -2.0, 1))
        with pytest.raises(OracleConstraintError):
            oracle("U_flat", ProblemParams(1, 3.0, -4.0, -1))
        with pytest.raises(OracleConstraintError):
            oracle("bogus", ProblemParams(1, 3.0, 1.0, 1))

    @pytest.mark.parametrize("kind,params,K", ORACLE_CASES)
    def test_strong_form_residual(self, kind, params, K):
        sol = oracle(kind, params, free_constant=K)
        hi = 0.9 * sol.edge if sol.edge is not None else 3.0
        r = np.linspace(0.05, hi, 100)
        res = profile_residual(r, sol.w(r), sol.dw(r), sol.d2w(r), params)
        assert np.max(np.abs(res)) <= 1e-9

    @pytest.mark.parametrize("kind,params,K", ORACLE_CASES)
    def test_annihilates_phase_field(self, kind, params, K):
        if params.alpha == 0.0:
            pytest.skip("phase-plane reduction assumes a nonzero exponent")
        sol = oracle(kind, params, free_constant=K)
        hi = 0.9 * sol.edge if sol.edge is not None else 3.0
        for r in np.linspace(0.05, hi, 100):
            sample = sol.sample(float(r))
            state = from_profile(sample, params)
            if abs(state.y) < 1e-12 and abs(state.Y) < 1e-12:
                continue
            rate = field("S", (state.y, state.Y), params)
            an = profile_state_rates(sample, float(sol.d2w(np.array([r]))[0]), params)
            scale = max(1e-9, float(np.max(np.abs(rate))))
            assert np.max(np.abs(np.array(an) - rate)) <= 1e-9 * max(1.0, scale)


class TestFirstIntegrals:
    def test_barenblatt_annihilates_J_N(self):
        params = ProblemParams(2, 3.0, 2.0, 1)
        sol = oracle("barenblatt", params, free_constant=1.0)
        for r in np.linspace(0.05, 1.9, 40):
            assert abs(J_N(sol.sample(float(r)), params)) <= 1e-10

    def test_J_alpha_matches_rescaled_J_N(self):
        params = ProblemParams(2, 3.0, -1.5, 1)
        s = ProfileSample(0.7, 0.3, -0.2)
        assert J_alpha(s, params) == pytest.approx(
            0.7 ** (params.alpha - params.N) * J_N(s, params), rel=1e-14)


class TestPartitionLines:
    def test_alpha_equal_N_orbits_have_unit_slope_ratio(self):
        params = ProblemParams(2, 3.0, 2.0, 1)
        sol = oracle("barenblatt", params, free_constant=1.0)
        for r in np.linspace(0.1, 1.9, 30):
            st_ = from_profile(sol.sample(float(r)), params)
            sigma = st_.Y / st_.y
            assert abs(sigma - params.epsilon) <= 1e-9

    def test_alpha_equal_eta_orbits_ride_the_harmonic_line(self):
        params = ProblemParams(4, 3.0, 0.5, 1)
        dc = derive_constants(params)
        sol = oracle("p_harmonic", params)
        for r in np.linspace(0.1, 3.0, 30):
            st_ = from_profile(sol.sample(float(r)), params)
            zeta = float(phi_Y(st_.Y, params.p)) / st_.y
            assert abs(zeta - dc.eta) <= 1e-9

    def test_quadratic_oracle_line_invariant(self):
        params = ProblemParams(2, 3.0, -1.5, 1)
        sol = oracle("quadratic", params, free_constant=1.0)
        for r in np.linspace(0.1, 3.0, 30):
            st_ = from_profile(sol.sample(float(r)), params)
            zeta = float(phi_Y(st_.Y, params.p)) / st_.y
            sigma = st_.Y / st_.y
            assert abs(zeta + params.epsilon * params.N * sigma - params.alpha) <= 1e-9
