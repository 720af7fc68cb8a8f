"""Global phase-plane analysis: stationary points, asymptotic labels,
zero counting, limit cycles, the homoclinic connection function, the
critical similarity exponent, and the regime classifier.

The planar reduction has at most three stationary points: the origin
(where the field is non-Lipschitz, hence never linearized) and, when
eps (gamma + alpha) < 0, the pair +-M_ell carrying the flat profiles
w = +- ell r^gamma.  The linearization at M_ell has the characteristic
polynomial

    lambda^2 + (2 gamma + N + nu(alpha)) lambda + p'(N + gamma) = 0,

with positive constant term: M_ell is never a saddle, and its type is
decided by the trace and the discriminant alone.

A trajectory tail is labeled through the slope pair (zeta, sigma) =
(-r w'/w, Y/y), whose possible limits form a short list of points and
vertical lines; each label is re-verified against the logarithmic slope
of the profile (d ln|w| / d ln r -> -zeta).

The homoclinic connection is detected by shooting in the rescaled
inverse-slope chart (g, S): the connection function phi(alpha) is the
signed gap, on the line {g = 1/gamma}, between the orbit leaving the
double-zero point and the orbit entering the algebraic-decay point.
phi is strictly decreasing and its root is the critical exponent
alpha_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .params import (
    DerivedConstants,
    ParameterError,
    ProblemParams,
    derive_constants,
    m_ell_point,
)
from .integrate import (
    IntegrationConfig,
    IntegrationError,
    Trajectory,
    integrate_s,
)
from .systems import PhaseState, field as chart_field, phi_Y
from . import trajectories as traj_mod


class AnalysisError(RuntimeError):
    """A detector or shooting run left its admissible region."""


class BracketError(AnalysisError):
    """The connection function had equal signs at both bracket ends."""


LOCAL_TYPES = (
    "saddle",
    "sink_node",
    "sink_spiral",
    "source_node",
    "source_spiral",
    "weak_source",
    "center_like",
)

ASYMPTOTIC_LABELS = (
    "A_gamma",
    "A_r",
    "A_alpha",
    "L_eta",
    "L_plus",
    "L_minus",
    "M_ell",
    "minus_M_ell",
    "origin",
    "cycle",
    "oscillating_sign",
    "escape",
    "undetermined",
)

THEOREM_TAGS = ("pin", "osc", "mel", "int", "pom", "clin", "sou", "orb", "ent")


# ---------------------------------------------------------------------------
# stationary points


@dataclass(frozen=True)
class StationaryPointInfo:
    """Classification record for one stationary point of the (y, Y) plane."""

    point_id: str  # "origin", "M_ell", "minus_M_ell"
    location: tuple[float, float]
    eigenvalues: Optional[tuple[complex, complex]]
    local_type: str
    eigenvectors: Optional[tuple[tuple[float, float], tuple[float, float]]] = None

    def __post_init__(self) -> None:
        if self.local_type not in LOCAL_TYPES:
            raise ValueError(f"unknown local type {self.local_type!r}")


def _m_ell_eigen(params: ProblemParams):
    """Eigenvalues and eigenvectors of the linearization at M_ell.

    The characteristic polynomial is lambda^2 + (2 gamma + N + nu) lambda
    + p'(N + gamma); the linearization matrix in the translated frame is
    [[-gamma, -eps nu], [eps alpha, -(gamma + N + nu)]].
    """
    dc = derive_constants(params)
    nu = dc.nu_alpha
    if nu is None:
        raise AnalysisError("no linearization at alpha = -gamma")
    N, eps = float(params.N), float(params.epsilon)
    trace = -(2.0 * dc.gamma + N + nu)
    det = dc.p_prime * (N + dc.gamma)
    lam = np.roots([1.0, -trace, det])
    # order by real part, ascending
    lam = sorted((complex(l) for l in lam), key=lambda z: (z.real, z.imag))
    l1, l2 = lam
    e1 = (-eps * nu, (l1 + dc.gamma).real)
    e2 = (eps * nu, (-dc.gamma - l2).real)
    return (l1, l2), (e1, e2), trace, dc.discriminant_Delta


def classify_stationary_points(params: ProblemParams) -> list[StationaryPointInfo]:
    """List and classify the stationary points of the planar system.

    The origin is always present and reported ``center_like`` with no
    eigendata (the field is only Hölder there).  The pair +-M_ell exists
    iff eps (gamma + alpha) < 0; its type follows from the trace
    -(2 gamma + N + nu(alpha)) and the discriminant (node vs spiral).
    """
    dc = derive_constants(params)
    out = [StationaryPointInfo("origin", (0.0, 0.0), None, "center_like")]
    m = m_ell_point(params)
    if m is None:
        return out
    (l1, l2), (e1, e2), trace, delta = _m_ell_eigen(params)
    if params.epsilon == -1 and params.alpha == dc.alpha_star:
        local = "weak_source"
    else:
        spiral = delta is not None and delta < 0.0
        if trace < 0.0:
            local = "sink_spiral" if spiral else "sink_node"
        else:
            local = "source_spiral" if spiral else "source_node"
    for pid, sign in (("M_ell", 1.0), ("minus_M_ell", -1.0)):
        out.append(StationaryPointInfo(pid, (sign * m[0], sign * m[1]),
                                       (l1, l2), local, (e1, e2)))
    return out


# ---------------------------------------------------------------------------
# zero counting


def count_sign_changes(trajectory: Trajectory, window=None) -> int:
    """Number of strict sign changes of y over a tau window.

    Transversal zeros are recorded by the integrator as events; sample
    sign flips catch any crossing integrated without event recording.
    The two counts are reconciled by crossing position.
    """
    tau = np.asarray(trajectory.tau, dtype=float)
    if window is None:
        lo, hi = float(np.min(tau)), float(np.max(tau))
    else:
        lo, hi = float(window[0]), float(window[1])
        if lo > hi:
            lo, hi = hi, lo
    mask = (tau >= lo) & (tau <= hi)
    y = trajectory.ys[0][mask]
    t = tau[mask]
    crossings: list[float] = []
    brackets: list[tuple[float, float]] = []
    s = np.sign(y)
    nz = s != 0.0
    idx = np.flatnonzero(nz)
    for a, b in zip(idx[:-1], idx[1:]):
        if s[a] * s[b] < 0.0:
            # linear zero position between the two samples
            ta, tb = t[a], t[b]
            ya, yb = y[a], y[b]
            crossings.append(float(ta + (tb - ta) * ya / (ya - yb)))
            brackets.append((min(ta, tb), max(ta, tb)))
    # events refine, and catch crossings hidden between coarse samples;
    # an event inside a sample interval that already flipped sign is the
    # same crossing seen twice
    for ev in trajectory.events:
        if ev.kind == "y_zero_crossing" and lo <= ev.time <= hi and ev.state.Y != 0.0:
            if not any(ta <= ev.time <= tb for ta, tb in brackets):
                crossings.append(ev.time)
    return len(crossings)


# ---------------------------------------------------------------------------
# asymptotic labels


def _tail_window(trajectory: Trajectory, frac: float = 0.2):
    """Sample mask for the terminal ``frac`` of the tau span, in the
    trajectory's integration direction."""
    tau = np.asarray(trajectory.tau, dtype=float)
    d = trajectory.direction
    t_end = tau[-1]
    span = abs(tau[-1] - tau[0])
    width = max(frac * span, 1e-12)
    return d * (tau - t_end) >= -width


def _slope_fit(trajectory: Trajectory, mask) -> Optional[float]:
    """Least-squares fit of d ln|w| / d tau over the masked samples."""
    dc = derive_constants(trajectory.params)
    tau = np.asarray(trajectory.tau, dtype=float)[mask]
    y = trajectory.ys[0][mask]
    good = np.abs(y) > 0.0
    if np.count_nonzero(good) < 3 or np.ptp(tau[good]) <= 0.0:
        return None
    lw = dc.gamma * tau[good] + np.log(np.abs(y[good]))
    return float(np.polyfit(tau[good], lw, 1)[0])


def asymptotic_label(trajectory: Trajectory, params: ProblemParams,
                     match_tol: float = 1e-3, fit_tol: float = 0.01) -> str:
    """Label the terminal end of a trajectory by its slope-pair limit.

    The tail window is the last 20% of the tau span.  Candidate limits of
    (zeta, sigma) = (-r w'/w, Y/y):

    * A_gamma  = (-gamma, eps(alpha+gamma)/(N+gamma))  -- flat profile,
      the slope pair at +-M_ell;
    * A_r      = (0, eps alpha/N)                      -- regular end;
    * A_alpha  = (alpha, 0)                            -- algebraic decay;
    * L_eta    = zeta -> eta with |sigma| -> infinity  (p != N);
    * L_plus / L_minus = zeta -> 0 with sigma -> +-infinity (p >= N / p > N).

    A point match (within ``match_tol``) is re-verified against the fitted
    logarithmic slope d ln|w| / d ln r, which must equal -zeta within
    ``fit_tol`` relative to max(1, |zeta|).  Oscillating tails (sign
    changes of y) are labeled ``oscillating_sign``; constant-sign
    non-convergent bounded tails around a flat point are labeled
    ``cycle``; escape and capture terminations short-circuit.  If no
    detector fires the label is ``undetermined``.
    """
    dc = derive_constants(params)
    p, al, eps, N = params.p, params.alpha, float(params.epsilon), float(params.N)

    if trajectory.termination == "escape":
        return "escape"

    mask = _tail_window(trajectory)
    tau = np.asarray(trajectory.tau, dtype=float)[mask]
    y = trajectory.ys[0][mask]
    Y = trajectory.ys[1][mask]
    if tau.size < 3:
        return "undetermined"

    # oscillation: sign changes of y inside the tail window
    n_flips = count_sign_changes(trajectory, (float(tau[0]), float(tau[-1])))
    if n_flips >= 3:
        return "oscillating_sign"

    good = np.abs(y) > 0.0
    if np.count_nonzero(good) < 3:
        return "undetermined"
    zeta = np.asarray(phi_Y(Y[good], p)) / y[good]
    sigma = Y[good] / y[good]
    z_end, s_end = float(zeta[-1]), float(sigma[-1])
    z_spread = float(np.ptp(zeta[-max(3, zeta.size // 4):]))
    converged = z_spread <= 10.0 * match_tol

    slope = _slope_fit(trajectory, mask)

    def fit_ok(z_target: float) -> bool:
        if slope is None:
            return False
        return abs(slope - (-z_target)) <= fit_tol * max(1.0, abs(z_target))

    # point targets, checked nearest-first
    targets = [
        ("A_gamma", -dc.gamma, eps * (al + dc.gamma) / (N + dc.gamma)),
        ("A_r", 0.0, eps * al / N),
        ("A_alpha", al, 0.0),
    ]
    if converged:
        for name, zt, st in targets:
            if abs(z_end - zt) <= match_tol and abs(s_end - st) <= match_tol:
                if fit_ok(zt):
                    return name
    # vertical-line targets: zeta convergent, |sigma| divergent
    sig_grow = abs(s_end) > 10.0 and abs(s_end) > 2.0 * abs(float(sigma[0]))
    if converged and sig_grow:
        if dc.eta != 0.0 and abs(z_end - dc.eta) <= match_tol and fit_ok(dc.eta):
            return "L_eta"
        if abs(z_end) <= match_tol and fit_ok(0.0):
            if p >= N and s_end > 0.0:
                return "L_plus"
            if p > N and s_end < 0.0:
                return "L_minus"

    if trajectory.termination == "captured:origin":
        return "origin"
    if trajectory.termination == "captured:M_ell":
        return "A_gamma" if fit_ok(-dc.gamma) else "M_ell"
    if trajectory.termination == "captured:minus_M_ell":
        return "A_gamma" if fit_ok(-dc.gamma) else "minus_M_ell"
    if math.hypot(float(y[-1]), float(Y[-1])) <= 1e-5 and \
            trajectory.termination == "origin_flagged":
        return "origin"

    # constant-sign bounded non-convergent tail: cycling around a flat point
    m = m_ell_point(params)
    if m is not None and not converged and n_flips == 0:
        r_m = np.hypot(np.abs(y[good]) - m[0], np.abs(Y[good]) - abs(m[1]))
        if float(np.max(r_m)) < 1e6 and np.count_nonzero(np.diff(np.sign(
                np.abs(y[good]) - m[0]))) >= 4:
            return "cycle"
    return "undetermined"


# ---------------------------------------------------------------------------
# limit cycles


@dataclass
class CycleInfo:
    """A detected limit cycle.

    ``section`` describes the Poincaré section; ``fixed_point`` is the
    section coordinate of the cycle (Y at the crossing); ``orbit`` holds
    one sampled period as a (2, n) array; ``floquet_mean`` is the mean
    divergence of the field over one period (non-positive for a cycle
    that attracts in forward time).
    """

    section: str
    fixed_point: float
    period_tau: float
    orbit: np.ndarray
    stability: str  # "attracting" | "repelling" | "undetermined"
    floquet_mean: float
    meta: dict = dc_field(default_factory=dict)


def _section_crossings(trajectory: Trajectory, params: ProblemParams,
                       center: str):
    """(tau_k, Y_k) of the oriented section crossings along a trajectory.

    center "origin": section = positive Y-axis, crossed once per loop
    (the field has y' = -phi(Y) < 0 there).  center "M_ell" /
    "minus_M_ell": section = vertical ray below the flat point
    {|y| = ell, |Y| > (gamma ell)^{p-1}}, also crossed once per loop.
    """
    tau = np.asarray(trajectory.tau, dtype=float)
    y = trajectory.ys[0]
    Y = trajectory.ys[1]
    d = trajectory.direction
    out_t: list[float] = []
    out_Y: list[float] = []
    if center == "origin":
        level = y
        cond = lambda Yc: Yc > 0.0
    else:
        m = m_ell_point(params)
        if m is None:
            return np.array([]), np.array([])
        sgn = 1.0 if center == "M_ell" else -1.0
        level = y - sgn * m[0]
        Y_m = sgn * m[1]
        cond = lambda Yc: (Yc - Y_m) * sgn < 0.0
    s = np.sign(level)
    for i in range(level.size - 1):
        if s[i] * s[i + 1] < 0.0:
            f = level[i] / (level[i] - level[i + 1])
            Yc = float(Y[i] + f * (Y[i + 1] - Y[i]))
            if cond(Yc):
                out_t.append(float(tau[i] + f * (tau[i + 1] - tau[i])))
                out_Y.append(Yc)
    order = np.argsort(d * np.asarray(out_t)) if out_t else np.array([], dtype=int)
    return np.asarray(out_t)[order], np.asarray(out_Y)[order]


def _return_map(Y_sec: float, params: ProblemParams, center: str,
                direction: int, cfg: IntegrationConfig,
                period_guess: float):
    """One Poincaré return from the section point; returns
    (Y_next, period, trajectory)."""
    if center == "origin":
        start = PhaseState(0.0, 0.0, Y_sec)
    else:
        m = m_ell_point(params)
        sgn = 1.0 if center == "M_ell" else -1.0
        start = PhaseState(0.0, sgn * m[0], Y_sec)
    span = min(max(4.0 * period_guess, 10.0), cfg.max_time_span)
    traj = integrate_s(start, params, direction=direction, config=cfg,
                       capture=False, tau_span=span)
    t_k, Y_k = _section_crossings(traj, params, center)
    # drop the departure crossing itself
    sel = np.abs(direction * t_k) > 1e-9
    t_k, Y_k = t_k[sel], Y_k[sel]
    if t_k.size == 0:
        raise AnalysisError("return map: no section return within the span")
    return float(Y_k[0]), abs(float(t_k[0])), traj


def _floquet_mean(traj: Trajectory, t0: float, t1: float,
                  params: ProblemParams) -> float:
    """Mean divergence of the field over one period [t0, t1] of tau.

    div f = -2 gamma - N - eps |Y|^{(2-p)/(p-1)} / (p-1) is integrably
    singular where Y crosses 0; the quadrature is a trapezoid away from
    the crossings plus the analytic local integral
    2 h^{1/(p-1)} |Y'|^{(2-p)/(p-1)} (p-1)/ ... at each crossing, using
    the local linearization Y ~ Y'(tau - tau_c).
    """
    dc = derive_constants(params)
    p, eps = params.p, float(params.epsilon)
    d = traj.direction
    tau = d * np.asarray(traj.tau, dtype=float)
    lo, hi = sorted((d * t0, d * t1))
    mask = (tau >= lo) & (tau <= hi)
    t = tau[mask]
    Y = traj.ys[1][mask]
    y = traj.ys[0][mask]
    if t.size < 8:
        raise AnalysisError("floquet quadrature: too few samples on the period")
    q = (p - 2.0) / (p - 1.0)  # singular exponent, in (0, 1)
    Ymax = float(np.max(np.abs(Y)))
    cut = 0.02 * Ymax
    base = -2.0 * dc.gamma - float(params.N)
    integ = 0.0
    # trapezoid over sub-intervals where |Y| >= cut
    sing = -eps / (p - 1.0) * np.where(np.abs(Y) >= cut,
                                       np.abs(np.where(np.abs(Y) >= cut, Y, 1.0)) ** (-q),
                                       0.0)
    integ += float(np.trapezoid(sing, t))
    # analytic pieces across each |Y| < cut excursion: int |Y|^{-q} dtau
    # with Y ~ Y0 + Ydot (tau - tc)
    inside = np.abs(Y) < cut
    i = 0
    n = t.size
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        ia, ib = max(i - 1, 0), min(j + 1, n - 1)
        dt = t[ib] - t[ia]
        if dt > 0.0:
            Ydot = (Y[ib] - Y[ia]) / dt
            if Ydot != 0.0 and Y[ia] * Y[ib] < 0.0:
                # linear crossing: int_{Ya}^{Yb} |Y|^{-q} dY / Ydot
                piece = (abs(Y[ia]) ** (1.0 - q) + abs(Y[ib]) ** (1.0 - q)) \
                    / ((1.0 - q) * abs(Ydot))
            else:
                # shallow excursion without crossing: midpoint value
                Ymid = max(abs(0.5 * (Y[ia] + Y[ib])), 1e-300)
                piece = Ymid ** (-q) * dt
            integ += (-eps / (p - 1.0)) * piece
        i = j + 1
    period = hi - lo
    return base + integ / period


def detect_limit_cycle(trajectory: Trajectory, params: ProblemParams,
                       config: Optional[IntegrationConfig] = None,
                       refine_tol: float = 1e-8) -> Optional[CycleInfo]:
    """Detect a limit cycle from the tail of a trajectory.

    The Poincaré section is the positive Y-axis when the tail oscillates
    in sign (cycle around the origin), otherwise the vertical ray below
    the flat point on the tail's side.  At least 10 oriented section
    crossings are required; the return ordinates must approach a fixed
    point, which is then polished by secant iteration on the return map
    until one more return reproduces it within ``refine_tol``.  Absence
    of a cycle returns None.
    """
    cfg = config or IntegrationConfig()
    d = trajectory.direction
    n_flips = count_sign_changes(trajectory)
    if n_flips >= 3:
        center = "origin"
    else:
        m = m_ell_point(params)
        if m is None:
            return None
        tail_y = trajectory.ys[0][-1]
        center = "M_ell" if tail_y > 0.0 else "minus_M_ell"

    t_k, Y_k = _section_crossings(trajectory, params, center)
    if t_k.size < 10:
        return None
    # use the last crossings; they must be settling toward a fixed point
    Y_tail = Y_k[-6:]
    gaps = np.abs(np.diff(Y_tail))
    if gaps[-1] > 0.5 * float(np.max(np.abs(Y_tail))) and gaps[-1] > gaps[0]:
        return None
    period_guess = abs(float(t_k[-1] - t_k[-2]))

    # secant polish of the return-map fixed point
    x0 = float(Y_tail[-2])
    x1 = float(Y_tail[-1])
    try:
        r0, _, _ = _return_map(x0, params, center, d, cfg, period_guess)
        f0 = r0 - x0
        best = None
        for _ in range(30):
            r1, per, traj1 = _return_map(x1, params, center, d, cfg, period_guess)
            f1 = r1 - x1
            if abs(f1) <= refine_tol * max(1.0, abs(x1)):
                best = (x1, per, traj1)
                break
            if f1 == f0:
                break
            x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
            x0, f0, x1 = x1, f1, x2
    except (AnalysisError, IntegrationError):
        return None
    if best is None:
        return None
    Y_fix, period, orbit_traj = best
    # one sampled period for the orbit and the Floquet quadrature
    t_ret, _ = _section_crossings(orbit_traj, params, center)
    t_ret = t_ret[np.abs(d * t_ret) > 1e-9]
    t1 = float(t_ret[0])
    tau = d * np.asarray(orbit_traj.tau)
    sel = (tau >= min(0.0, d * t1)) & (tau <= max(0.0, d * t1))
    orbit = orbit_traj.ys[:, sel]
    fl = _floquet_mean(orbit_traj, 0.0, t1, params)
    if d == 1:
        stability = "attracting" if fl < 0.0 else ("repelling" if fl > 0.0 else "undetermined")
    else:
        # the trajectory converged to it backward: repelling forward unless
        # the divergence says otherwise
        stability = "repelling" if fl > 0.0 else ("attracting" if fl < 0.0 else "undetermined")
    section = ("positive Y-axis" if center == "origin"
               else f"vertical ray below {center}")
    return CycleInfo(section=section, fixed_point=Y_fix, period_tau=period,
                     orbit=orbit, stability=stability, floquet_mean=fl,
                     meta={"center": center, "crossings_seen": int(t_k.size),
                           "approach_direction": d})


# ---------------------------------------------------------------------------
# the connection function and the critical exponent


def _phi_shoot(params: ProblemParams, cfg: IntegrationConfig,
               offset: float = 1e-7):
    """(S0, S1): section ordinates on the line {g = 1/gamma} of the two
    separatrix orbits of the rescaled inverse-slope chart.

    Both separatrix segments have F > 0 along them (the monotonicity
    lemma behind the uniqueness of the critical exponent), so g is
    strictly monotone up to the first section crossing and each orbit is
    the graph of a scalar ODE dS/dg = S G / (g F).  Integrating in g
    avoids the arbitrarily slow rescaled-time traverse near the decay
    point.
    """
    dc = derive_constants(params)
    p, al, N = params.p, params.alpha, float(params.N)
    if params.epsilon != -1:
        raise ParameterError("the connection function is defined for the "
                             "backward time direction (epsilon = -1)")
    if not (al < 0.0) or dc.beta <= 0.0:
        raise ParameterError("the connection function requires alpha < 0 < beta")
    g_L = 1.0 / dc.gamma
    g_A = 1.0 / abs(al)
    beta, eta = dc.beta, dc.eta

    def F(g, S):
        return beta * S * (1.0 + eta * g) - (1.0 + al * g) / (p - 1.0)

    def G(g, S):
        return 1.0 + al * g - beta * (1.0 + N * g) * S

    def rhs(g, u):
        # F > 0 holds on the separatrix but trial stages of the embedded
        # RK pair may probe states just off it where F <= 0; flooring F
        # there blows up the slope estimate and forces step rejection
        # instead of aborting the whole shoot.
        S = float(u[0])
        f = F(g, S)
        if not (f > 0.0):
            return [math.copysign(1e30, S * G(g, S) / g)]
        return [S * G(g, S) / (g * f)]

    # orbit leaving the double-zero point B' = (0, 1/beta): unstable
    # eigenvector (1, (alpha - N)/(beta (1 + lambda))), lambda = (p-2)/(p-1)
    lam = (p - 2.0) / (p - 1.0)
    slope0 = (al - N) / (dc.beta * (1.0 + lam))
    S_start0 = 1.0 / dc.beta + offset * slope0
    sol0 = solve_ivp(rhs, (offset, g_L), [S_start0], method="RK45",
                     rtol=cfg.rel_tol, atol=min(cfg.abs_tol, 1e-13))
    if not sol0.success:
        raise AnalysisError(
            "double-zero separatrix left the admissible region before the section")
    S0 = float(sol0.y[0, -1])

    # orbit entering the algebraic-decay point A' = (1/|alpha|, 0) along
    # its center manifold S = m x + m2 x^2 + O(x^3), x = g - 1/|alpha|.
    # F vanishes to first order on the manifold, so a first-order launch
    # is on the wrong side half the time; the second-order start keeps
    # F > 0 at a macroscopic launch distance where the graph over g is
    # well conditioned.
    m1 = al * al / (beta * (al - eta) * (p - 1.0))
    m2 = -al ** 3 * (N + (p - 2.0) * (al - eta)) \
        / (beta * (p - 1.0) * (al - eta) ** 2)
    x0 = -1e-3 * (g_A - g_L)
    S_start1 = m1 * x0 + m2 * x0 * x0
    sol1 = solve_ivp(rhs, (g_A + x0, g_L), [S_start1], method="RK45",
                     rtol=cfg.rel_tol, atol=min(cfg.abs_tol, 1e-13))
    if not sol1.success:
        raise AnalysisError(
            "algebraic-decay separatrix left the admissible region before the section")
    S1 = float(sol1.y[0, -1])
    return S0, S1


def phi_of_alpha(N: int, p: float, alpha: float,
                 config: Optional[IntegrationConfig] = None,
                 offset: float = 1e-7) -> float:
    """Signed gap phi(alpha) = S0 - S1 between the two separatrices on
    the section {g = 1/gamma} of the rescaled inverse-slope chart.

    phi is continuous and strictly decreasing on the critical bracket;
    phi > 0 means the double-zero orbit exits above the decay orbit
    (alpha below critical), phi < 0 the reverse, phi = 0 the homoclinic
    connection.
    """
    cfg = config or IntegrationConfig()
    params = ProblemParams(N=N, p=p, alpha=alpha, epsilon=-1)
    S0, S1 = _phi_shoot(params, cfg, offset)
    return S0 - S1


@dataclass(frozen=True)
class AlphaCResult:
    """The critical exponent with its certified bracket."""

    value: float
    bracket: tuple[float, float]
    iterations: int
    phi_at_ends: tuple[float, float]
    method: str  # "closed_form" | "bisection"


def critical_bracket(N: int, p: float) -> tuple[float, float]:
    """Open bracket (max(alpha_star, alpha_p), min(alpha_2, -p'))
    containing the critical exponent."""
    params = ProblemParams(N=N, p=p, alpha=-1.0, epsilon=-1)
    dc = derive_constants(params)
    lo = max(dc.alpha_star, dc.alpha_p)
    hi = -dc.p_prime
    if dc.alpha_2 is not None:
        hi = min(dc.alpha_2, hi)
    return lo, hi


def find_alpha_c(N: int, p: float, tol: float = 1e-6,
                 config: Optional[IntegrationConfig] = None,
                 force_bisection: bool = False) -> AlphaCResult:
    """The unique alpha_c < 0 carrying a homoclinic orbit.

    For N = 1 the value is the closed form -(p-1)/(p-2) (returned
    exactly unless ``force_bisection``).  Otherwise phi is bisected over
    the critical bracket, retreating inward by 1e-4 of the width to
    avoid the degenerate endpoint dynamics; equal signs at both ends
    raise :class:`BracketError` rather than widening silently.
    """
    cfg = config or IntegrationConfig()
    lo, hi = critical_bracket(N, p)
    params = ProblemParams(N=N, p=p, alpha=-1.0, epsilon=-1)
    dc = derive_constants(params)
    if N == 1:
        if not force_bisection:
            return AlphaCResult(dc.alpha_p, (lo, hi), 0,
                                (math.nan, math.nan), "closed_form")
        # the one-dimensional root sits exactly at the lower bracket end;
        # extend the bisection bracket halfway down toward the Hopf value
        lo = 0.5 * (dc.alpha_star + dc.alpha_p)
    retreat = 1e-4 * (hi - lo)
    a, b = lo + retreat, hi - retreat
    fa = phi_of_alpha(N, p, a, cfg)
    fb = phi_of_alpha(N, p, b, cfg)
    if not (fa > 0.0 > fb):
        err = BracketError(
            f"connection function does not change sign on ({a}, {b}): "
            f"phi = ({fa}, {fb})")
        err.bracket = (a, b)
        err.phi_at_ends = (fa, fb)
        raise err
    it = 0
    while b - a > tol and it < 200:
        mid = 0.5 * (a + b)
        fm = phi_of_alpha(N, p, mid, cfg)
        if fm > 0.0:
            a, fa = mid, fm
        else:
            b, fb = mid, fm
        it += 1
    return AlphaCResult(0.5 * (a + b), (a, b), it, (fa, fb), "bisection")


# ---------------------------------------------------------------------------
# regime classification


@dataclass
class RegimeReport:
    """Everything the theorem for the active (eps, alpha) range asserts
    that a finite run can check."""

    params: ProblemParams
    constants: DerivedConstants
    theorem_tag: str
    stationary_points: list[StationaryPointInfo]
    trajectories: dict  # kind -> digest dict
    cycles: list[CycleInfo]
    checks: list[tuple[str, str]]  # (description, "pass"|"fail"|"untested")
    phi_value: Optional[float] = None
    alpha_c_bracket: Optional[tuple[float, float]] = None

    def passed(self) -> bool:
        return all(status != "fail" for _, status in self.checks)


def theorem_tag(params: ProblemParams,
                alpha_c: Optional[float] = None,
                alpha_c_tol: float = 1e-6) -> str:
    """The case of the global classification governing (eps, alpha).

    eps = +1 splits at -gamma (pin above, mel below); eps = -1 splits at
    -gamma (osc at or below), 0 (int above), -p' (pom in [-p', 0)), and
    on (-gamma, -p') at alpha_star (sou), alpha_c (orb below, clin at,
    ent above).  When alpha_c is needed but not supplied, it is resolved
    here (closed form for N = 1, coarse bisection otherwise).
    """
    dc = derive_constants(params)
    al = params.alpha
    if params.epsilon == 1:
        return "pin" if al >= -dc.gamma else "mel"
    if al <= -dc.gamma:
        return "osc"
    if al > 0.0:
        return "int"
    if al >= -dc.p_prime:
        return "pom"
    if al <= dc.alpha_star:
        return "sou"
    if alpha_c is None:
        if params.N == 1:
            alpha_c = dc.alpha_p
        else:
            alpha_c = find_alpha_c(params.N, params.p, tol=alpha_c_tol).value
    if abs(al - alpha_c) <= alpha_c_tol:
        return "clin"
    return "orb" if al < alpha_c else "ent"


def _traj_digest(traj: Trajectory, params: ProblemParams) -> dict:
    return {
        "termination": traj.termination,
        "direction": traj.direction,
        "label": asymptotic_label(traj, params),
        "sign_changes": count_sign_changes(traj),
        "tau_range": (float(traj.tau.min()), float(traj.tau.max())),
    }


def classify_regime(params: ProblemParams,
                    config: Optional[IntegrationConfig] = None,
                    tau_budget: float = 200.0) -> RegimeReport:
    """Run the constructions and detectors the governing theorem talks
    about and grade its machine-checkable clauses.

    Each check is "pass" or "fail" when the run could decide it, and
    "untested" when the finite tau budget or a failed construction left
    it undecided (the classifier never extrapolates; claims about
    infinitely many zeros are certified only through a detected cycle).
    """
    cfg = config or IntegrationConfig()
    dc = derive_constants(params)
    p, al, eps, N = params.p, params.alpha, params.epsilon, float(params.N)
    span = min(tau_budget, cfg.max_time_span)

    tag = theorem_tag(params)
    spoints = classify_stationary_points(params)
    digests: dict = {}
    cycles: list[CycleInfo] = []
    checks: list[tuple[str, str]] = []
    trajs: dict = {}

    def run(kind: str, **kw):
        try:
            if kind == "T_r":
                t = traj_mod.shoot_regular(params, cfg, tau_span=span,
                                           consistency_check=False, **kw)
            elif kind == "T_eps":
                t = traj_mod.shoot_double_zero(params, config=cfg, tau_span=span,
                                               consistency_check=False, **kw)
            elif kind == "T_alpha":
                t = traj_mod.shoot_T_alpha(params, cfg, tau_span=span,
                                           consistency_check=False, **kw)
            elif kind in ("T_eta", "T_u"):
                t = traj_mod.shoot_T_eta_or_u(params, cfg, tau_span=span,
                                              consistency_check=False, **kw)
            else:
                t = traj_mod.shoot_T_pm(params, config=cfg, tau_span=span, **kw)
        except (IntegrationError, ParameterError, AnalysisError) as exc:
            digests[kind] = {"error": str(exc)}
            return None
        trajs[kind] = t
        digests[kind] = _traj_digest(t, params)
        return t

    def grade(desc: str, outcome: Optional[bool]):
        checks.append((desc, "untested" if outcome is None
                       else ("pass" if outcome else "fail")))

    t_r = run("T_r")
    t_eps = run("T_eps")

    def label_of(t):
        return None if t is None else digests[t.meta["kind"]]["label"]

    def zeros_of(t):
        return None if t is None else digests[t.meta["kind"]]["sign_changes"]

    def cycle_from(t, name):
        if t is None:
            return None
        cyc = detect_limit_cycle(t, params, cfg)
        if cyc is not None:
            cyc.meta["source"] = name
            cycles.append(cyc)
        return cyc

    if tag == "pin":
        if al < N:
            grade("regular orbit keeps a strict constant sign",
                  None if t_r is None else zeros_of(t_r) == 0)
        elif al == N:
            grade("regular orbit keeps a strict constant sign with compact support",
                  None if t_r is None else zeros_of(t_r) == 0
                  and t_r.termination == "captured:origin")
        else:
            grade("regular orbit has at least one simple zero",
                  None if t_r is None else zeros_of(t_r) >= 1)
        grade("compact-support orbit constructed",
              None if t_eps is None else True)
        grade("no stationary pair off the origin",
              dc.ell is None)

    elif tag == "mel":
        grade("regular orbit keeps a strict constant sign",
              None if t_r is None else zeros_of(t_r) == 0)
        grade("regular orbit approaches the flat profile",
              None if t_r is None else label_of(t_r) in ("A_gamma", "M_ell"))
        t_a = run("T_alpha")
        grade("algebraic-decay orbit approaches the flat profile",
              None if t_a is None else label_of(t_a) in ("A_gamma", "M_ell"))
        grade("every orbit has at most one simple zero",
              all(zeros_of(t) <= 1 for t in (t_r, t_eps, t_a) if t is not None)
              if any(t is not None for t in (t_r, t_eps, t_a)) else None)

    elif tag == "osc":
        grade("regular orbit oscillates in sign",
              None if t_r is None else label_of(t_r) == "oscillating_sign")
        cyc_r = cycle_from(t_r, "O_r")
        grade("regular orbit has a limit cycle around the origin",
              None if t_r is None else cyc_r is not None)
        cyc_e = cycle_from(t_eps, "O_eps")
        grade("compact-support orbit has a limit cycle (unique hole solution)",
              None if t_eps is None else cyc_e is not None)
        grade("detected cycles attract in forward time",
              all(c.floquet_mean <= 1e-6 for c in cycles) if cycles else None)

    elif tag == "int":
        grade("regular orbit keeps a strict constant sign",
              None if t_r is None else zeros_of(t_r) == 0)
        grade("regular orbit approaches the flat profile",
              None if t_r is None else label_of(t_r) in ("A_gamma", "M_ell"))
        grade("hole orbit approaches the flat profile",
              None if t_eps is None else label_of(t_eps) in ("A_gamma", "M_ell"))
        t_a = run("T_alpha")
        grade("algebraic-decay orbit constructed",
              None if t_a is None else True)
        grade("flat point is a sink node",
              any(sp.point_id == "M_ell" and sp.local_type == "sink_node"
                  for sp in spoints))

    elif tag == "pom":
        if al != -dc.p_prime:
            grade("regular orbit has exactly one simple zero",
                  None if t_r is None else zeros_of(t_r) == 1)
        else:
            grade("regular orbit has exactly one simple zero",
                  None if t_r is None else zeros_of(t_r) == 1)
        grade("hole orbit approaches the flat profile",
              None if t_eps is None else label_of(t_eps) in ("A_gamma", "M_ell"))
        t_a = run("T_alpha")
        grade("every orbit has at most two simple zeros",
              all(zeros_of(t) <= 2 for t in (t_r, t_eps, t_a) if t is not None)
              if any(t is not None for t in (t_r, t_eps, t_a)) else None)
        grade("flat point is a sink",
              any(sp.point_id == "M_ell" and sp.local_type in ("sink_node", "sink_spiral")
                  for sp in spoints))

    elif tag == "sou":
        t_a = run("T_alpha")
        grade("algebraic-decay orbit converges to the flat point backward",
              None if t_a is None else label_of(t_a) in ("A_gamma", "M_ell"))
        grade("regular orbit oscillates in sign",
              None if t_r is None else label_of(t_r) == "oscillating_sign")
        cyc_r = cycle_from(t_r, "O_r")
        grade("regular orbit has a limit cycle around the origin",
              None if t_r is None else cyc_r is not None)
        cyc_e = cycle_from(t_eps, "O_eps")
        grade("hole orbit leaves the flat quadrant and cycles around the origin",
              None if t_eps is None else cyc_e is not None)
        grade("flat point is a source or weak source",
              any(sp.point_id == "M_ell" and
                  sp.local_type in ("source_node", "source_spiral", "weak_source")
                  for sp in spoints))

    elif tag == "orb":
        t_a = run("T_alpha")
        cyc_a = cycle_from(t_a, "O_alpha")
        grade("algebraic-decay orbit has a backward limit cycle around the flat point",
              None if t_a is None else cyc_a is not None)
        grade("regular orbit oscillates in sign",
              None if t_r is None else label_of(t_r) == "oscillating_sign")
        cyc_e = cycle_from(t_eps, "O_eps")
        grade("hole orbit cycles around the origin",
              None if t_eps is None else cyc_e is not None)
        grade("flat point is a sink",
              any(sp.point_id == "M_ell" and sp.local_type in ("sink_node", "sink_spiral")
                  for sp in spoints))

    elif tag == "clin":
        grade("connection gap vanishes at the critical exponent", None)
        grade("regular orbit oscillates in sign",
              None if t_r is None else label_of(t_r) == "oscillating_sign")
        cyc_r = cycle_from(t_r, "O_r")
        grade("regular orbit has a limit cycle surrounding all stationary points",
              None if t_r is None else cyc_r is not None)

    else:  # ent
        grade("regular orbit has at least two simple zeros",
              None if t_r is None else zeros_of(t_r) >= 2)
        grade("hole orbit stays near the flat point (converges or cycles)",
              None if t_eps is None else
              label_of(t_eps) in ("A_gamma", "M_ell", "cycle"))
        cycle_from(t_r, "O_r")

    # the connection function, when defined
    phi_value = None
    alpha_c_bracket = None
    if eps == -1 and al < 0.0 and dc.beta > 0.0:
        try:
            phi_value = phi_of_alpha(params.N, p, al, cfg)
        except (AnalysisError, ParameterError):
            phi_value = None
        if tag in ("sou", "orb", "clin", "ent"):
            lo, hi = critical_bracket(params.N, p)
            alpha_c_bracket = (lo, hi)
            if tag == "clin" and phi_value is not None:
                checks[0] = (checks[0][0],
                             "pass" if abs(phi_value) <= 1e-3 else "fail")

    return RegimeReport(params=params, constants=dc, theorem_tag=tag,
                        stationary_points=spoints, trajectories=digests,
                        cycles=cycles, checks=checks,
                        phi_value=phi_value, alpha_c_bracket=alpha_c_bracket)
