"""Shooting constructions: agreement with closed forms, local laws at the
launch points, scaling, and admissibility errors."""

import math

import numpy as np
import pytest

from plap.params import ParameterError, ProblemParams, derive_constants
from plap.systems import oracle
from plap.trajectories import (
    SpecialTrajectorySpec,
    shoot,
    shoot_double_zero,
    shoot_regular,
    shoot_T_alpha,
    shoot_T_eta_or_u,
    shoot_T_pm,
)


def _loglog_slope(r, w, lo, hi):
    mask = (r >= lo) & (r <= hi) & (w > 0.0)
    assert np.count_nonzero(mask) >= 5
    return np.polyfit(np.log(r[mask]), np.log(w[mask]), 1)[0]


class TestRegular:
    def test_matches_compact_support_closed_form(self):
        params = ProblemParams(2, 3.0, 2.0, 1)
        traj = shoot_regular(params, a=1.0)
        r, w, _ = traj.profile()
        mask = (r >= 0.01) & (r <= 0.9 * 3.0 ** (2.0 / 3.0))
        expected = np.clip(1.0 - r[mask] ** 1.5 / 3.0, 0.0, None) ** 2
        assert np.max(np.abs(w[mask] - expected) / expected) <= 1e-6

    def test_matches_quadratic_closed_form(self):
        params = ProblemParams(2, 3.0, -1.5, 1)
        K = 1.0 / math.sqrt(3.0)
        sol = oracle("quadratic", params, free_constant=K)
        a = float(sol(np.array([1e-12]))[0])
        traj = shoot_regular(params, a=a, tau_span=10.0)
        r, w, _ = traj.profile()
        mask = (r >= 0.05) & (r <= 2.0)
        expected = sol(r[mask])
        assert np.max(np.abs(w[mask] - expected) / np.abs(expected)) <= 1e-6

    def test_strict_constant_sign_in_single_sign_regime(self):
        traj = shoot_regular(ProblemParams(2, 3.0, 1.0, 1), tau_span=30.0)
        assert np.min(traj.ys[0]) > 0.0 or np.max(traj.ys[0]) < 0.0

    def test_central_slope_ratio(self):
        # |w'|^{p-2} w' / (r w) -> -eps alpha / N at the center
        params = ProblemParams(2, 3.0, 1.0, 1)
        traj = shoot_regular(params, tau_span=10.0)
        r, w, dw = traj.profile()
        i = np.argmin(r)
        ratio = (abs(dw[i]) ** (params.p - 2.0) * dw[i]) / (r[i] * w[i])
        assert ratio == pytest.approx(-params.epsilon * params.alpha / params.N,
                                      abs=1e-6)

    @pytest.mark.parametrize("a", [0.5, 2.0])
    def test_amplitude_scaling_law(self, a):
        # w(r, a) = a w(a^{-1/gamma} r, 1)
        params = ProblemParams(2, 3.0, 1.0, 1)
        dc = derive_constants(params)
        base = shoot_regular(params, a=1.0, tau_span=20.0)
        scaled = shoot_regular(params, a=a, tau_span=20.0)
        r1, w1, _ = base.profile()
        r2, w2, _ = scaled.profile()
        o1, o2 = np.argsort(r1), np.argsort(r2)
        probe = np.linspace(0.2, 1.5, 20)
        ref = a * np.interp(a ** (-1.0 / dc.gamma) * probe, r1[o1], w1[o1])
        got = np.interp(probe, r2[o2], w2[o2])
        assert np.max(np.abs(got - ref)) <= 1e-8 * max(1.0, a)

    def test_offset_consistency_reported(self):
        traj = shoot_regular(ProblemParams(2, 3.0, 1.0, 1), tau_span=5.0,
                             consistency_check=True)
        assert traj.meta["offset_consistency"] <= 1e-6


class TestDoubleZero:
    def test_contact_exponent_and_amplitude(self):
        # near the edge: w ~ ((p-2)/(p-1))^{(p-1)/(p-2)} rbar^{1/(2-p)}
        #                      |rbar - r|^{(p-1)/(p-2)}
        params = ProblemParams(2, 3.0, 1.0, 1)
        traj = shoot_double_zero(params, r_bar=1.0)
        r, w, _ = traj.profile()
        mask = (r < 1.0) & (w > 0.0)
        d = 1.0 - r[mask]
        keep = (d > np.max(d) * 1e-3) & (d < np.max(d) * 1e-2)
        slope, logA = np.polyfit(np.log(d[keep]), np.log(w[mask][keep]), 1)
        assert slope == pytest.approx(2.0, abs=0.02)
        assert math.exp(logA) == pytest.approx(0.25, abs=0.01)

    def test_edge_matches_compact_support_closed_form(self):
        params = ProblemParams(2, 3.0, 2.0, 1)
        r_bar = 3.0 ** (2.0 / 3.0)
        traj = shoot_double_zero(params, r_bar=r_bar)
        r, w, _ = traj.profile()
        mask = (r >= 0.5 * r_bar) & (r <= 0.995 * r_bar)
        expected = np.clip(1.0 - r[mask] ** 1.5 / 3.0, 0.0, None) ** 2
        assert np.max(np.abs(w[mask] - expected)) <= 1e-6

    def test_edge_event_recorded(self):
        traj = shoot_double_zero(ProblemParams(2, 3.0, 1.0, 1), r_bar=1.0)
        assert any(e.kind == "double_zero_capture" for e in traj.events)

    def test_small_amplitude_oscillation_edge(self):
        # hole orbit in an oscillating regime must hand off before the
        # first extremum even though the amplitude stays tiny
        traj = shoot_double_zero(ProblemParams(1, 3.0, -4.0, -1),
                                 tau_span=30.0, consistency_check=False)
        assert traj.termination == "time_span"
        assert np.max(np.abs(traj.ys[0])) < 0.05


class TestAlgebraicDecay:
    def test_decay_exponent(self):
        params = ProblemParams(1, 3.0, -2.53, -1)
        traj = shoot_T_alpha(params, tau_span=25.0, consistency_check=False)
        r, w, _ = traj.profile()
        hi = np.max(r)
        slope = _loglog_slope(r, np.abs(w), hi / 10.0, hi)
        assert slope == pytest.approx(-params.alpha, rel=0.01)

    def test_unique_branch_below_minus_gamma(self):
        params = ProblemParams(1, 3.0, -4.0, -1)
        traj = shoot_T_alpha(params, tau_span=15.0, consistency_check=False)
        r, w, _ = traj.profile()
        # below -gamma the algebraic end sits at the center r -> 0
        lo = np.min(r)
        slope = _loglog_slope(r, np.abs(w), lo, 10.0 * lo)
        assert slope == pytest.approx(4.0, rel=0.01)


class TestEtaFamily:
    def test_growth_exponent_when_p_exceeds_N(self):
        params = ProblemParams(2, 3.0, 1.0, 1)
        traj = shoot_T_eta_or_u(params, consistency_check=False)
        assert traj.meta["kind"] == "T_u"
        r, w, _ = traj.profile()
        lo = np.min(r)
        slope = _loglog_slope(r, np.abs(w), lo, 10.0 * lo)
        assert slope == pytest.approx(0.5, rel=0.01)

    def test_singular_exponent_when_p_below_N(self):
        params = ProblemParams(4, 3.0, 1.0, 1)
        traj = shoot_T_eta_or_u(params, consistency_check=False)
        assert traj.meta["kind"] == "T_eta"
        r, w, _ = traj.profile()
        lo = np.min(r)
        slope = _loglog_slope(r, np.abs(w), lo, 10.0 * lo)
        assert slope == pytest.approx(-0.5, rel=0.01)

    def test_harmonic_parameter_matches_oracle(self):
        params = ProblemParams(4, 3.0, 0.5, 1)
        traj = shoot_T_eta_or_u(params, consistency_check=False)
        r, w, _ = traj.profile()
        sol = oracle("p_harmonic", params)
        mask = (r > 0.01) & (r < 1.0)
        c = np.median(w[mask] * r[mask] ** 0.5)
        expected = c * r[mask] ** (-0.5)
        assert np.max(np.abs(w[mask] - expected) / expected) <= 1e-6
        assert sol(np.array([1.0]))[0] == pytest.approx(1.0)

    def test_wrong_family_requested_is_rejected(self):
        spec = SpecialTrajectorySpec(kind="T_u")
        with pytest.raises(ParameterError):
            shoot(spec, ProblemParams(4, 3.0, 1.0, 1), consistency_check=False)


class TestBoundedSlopeFamily:
    def test_center_values_one_dimensional(self):
        params = ProblemParams(1, 3.0, 1.0, 1)
        traj = shoot_T_pm(params, a=1.0, c=1.0)
        r, w, dw = traj.profile()
        mask = r <= 1e-4
        assert np.count_nonzero(mask) >= 3
        # subtract the subleading tail to recover the center value
        dc = derive_constants(params)
        w0 = w[mask] - (1.0 / abs(dc.eta)) * r[mask] ** abs(dc.eta)
        assert np.max(np.abs(w0 - 1.0)) <= 1e-3
        assert np.max(np.abs(-dw[mask] - 1.0)) <= 1e-3

    def test_negative_branch_grows_at_center(self):
        params = ProblemParams(2, 3.0, 1.0, 1)
        traj = shoot_T_pm(params, a=1.0, c=-1.0)
        r, w, dw = traj.profile()
        mask = r <= 1e-3
        assert np.count_nonzero(mask) >= 3
        assert np.all(dw[mask] > 0.0)

    def test_p_below_N_rejected(self):
        with pytest.raises(ParameterError):
            shoot_T_pm(ProblemParams(4, 3.0, 1.0, 1), a=1.0, c=1.0)

    def test_sign_constraints_on_dispatch(self):
        with pytest.raises(ParameterError):
            shoot(SpecialTrajectorySpec(kind="T_minus", extra=(1.0, 1.0)),
                  ProblemParams(1, 3.0, 1.0, 1))


class TestDispatch:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            SpecialTrajectorySpec(kind="T_x")

    def test_nonpositive_offset_rejected(self):
        with pytest.raises(ValueError):
            SpecialTrajectorySpec(kind="T_r", offset=0.0)

    def test_dispatch_reaches_every_kind(self):
        params = ProblemParams(2, 3.0, 1.0, 1)
        t = shoot(SpecialTrajectorySpec(kind="T_r"), params, tau_span=5.0,
                  consistency_check=False)
        assert t.meta["kind"] == "T_r"
        t = shoot(SpecialTrajectorySpec(kind="T_eps"), params, tau_span=5.0,
                  consistency_check=False)
        assert t.meta["kind"] == "T_eps"
