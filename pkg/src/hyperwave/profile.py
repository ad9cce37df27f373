"""Equivariant profile ODE on the hyperbolic radius, and its monitors.

The wave profile (s(a), sigma(a)) in a horizontal cone obeys

    s_aa   = (Gamma_s/Gamma) sigma^2 - s_a/a - G_s/a^2 + mu Gamma + (c/a) sigma
    sigma_a = -(Gamma_s/Gamma) sigma s_a - sigma/a - (c/a) s_a

whose angular equation integrates exactly to a Gamma sigma + c F(s) = 0 for
trajectories emanating from the origin.  The primary formulation uses that
first integral to eliminate sigma, leaving the planar equation

    s_aa + s_a/a - mu Gamma + (G + c^2 F^2/(2 Gamma^2))_s / a^2 = 0,

and recovers sigma = -(c/a) F/Gamma algebraically; the full three-state
formulation is kept as a cross-check, where the identity residual and the
energy law

    E(a) = (a^2/2)(s_a^2 + sigma^2) + G - mu a^2 F,   E_a = -2 mu a F

measure accumulated integration error.  Integration runs in tau = log a by
default, which handles the stiff approach to a = 0 gracefully; trajectories
are exposed as functions of a either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, IntegrationError
from .odeint import (BLOWUP, EVENT, REACHED_END, STEP_LIMIT, Event,
                     IntegrationConfig, Trajectory, integrate)
from .regimes import WaveParameters
from .seed import ProfileState, SeedSpec, seed_state
from .surface import SurfaceProfile, capG, gs_over_gamma, potential_gradient

REDUCED = "reduced"
FULL = "full"

_GL_X, _GL_W = np.polynomial.legendre.leggauss(7)
_GL_THETA = 0.5 * (_GL_X + 1.0)
_GL_WEIGHT = 0.5 * _GL_W


def make_reduced_rhs(surface: SurfaceProfile, params: WaveParameters, log_time: bool):
    """Planar (s, s_a) right-hand side, in tau = log a or in a."""
    mu = params.mu
    gamma = surface.gamma

    if log_time:
        def rhs(tau, y):
            a = math.exp(tau)
            s, v = y[0], y[1]
            return np.array([a * v,
                             -v + a * mu * gamma(s) - potential_gradient(surface, params, s) / a])
    else:
        def rhs(a, y):
            s, v = y[0], y[1]
            return np.array([v,
                             -v / a + mu * gamma(s) - potential_gradient(surface, params, s) / (a * a)])
    return rhs


def make_full_rhs(surface: SurfaceProfile, params: WaveParameters, log_time: bool,
                  half_sign: float = 0.0):
    """Three-state (s, s_a, sigma) right-hand side.

    half_sign scales the extra x^2/2 contribution of the self-similar
    systems: 0 here, -1 for the horizontal similarity system, +1 for the
    vertical one.  The angular coefficient is q(x) = c/x + half_sign * x/2.
    """
    mu, c, k, b = params.mu, params.c, params.k, params.b
    gamma, gamma_s, capF = surface.gamma, surface.gamma_s, surface.capF

    def core(x, s, v, sg):
        gam = gamma(s)
        gs = gamma_s(s)
        ratio = sg / gam if gam != 0.0 else 0.0
        gso = k * k * gs + b * k - 2.0 * k * k * capF(s)  # G_s / Gamma
        xq = c + half_sign * 0.5 * x * x                  # x * q(x)
        dv = x * gs * ratio * sg - v - gso * gam / x + x * mu * gam + xq * sg
        dsg = -x * gs * ratio * v - sg - xq * v
        return dv, dsg

    if log_time:
        def rhs(tau, y):
            x = math.exp(tau)
            dv, dsg = core(x, y[0], y[1], y[2])
            return np.array([x * y[1], dv, dsg])
    else:
        def rhs(x, y):
            dv, dsg = core(x, y[0], y[1], y[2])
            return np.array([y[1], dv / x, dsg / x])
    return rhs


def profile_rhs(surface: SurfaceProfile, params: WaveParameters,
                state: ProfileState, formulation: str = REDUCED):
    """State derivative (ds/da, ds_a/da, dsigma/da) at one point.

    The reduced formulation differentiates the slaved
    sigma = -(c/a) F/Gamma along the flow; the full formulation uses the
    three-state equations directly.  Both must agree on trajectories that
    satisfy the angular first integral.
    """
    a, s, v, sg = state.a, state.s, state.s_a, state.sigma
    if formulation == FULL:
        mu, c = params.mu, params.c
        gam = surface.gamma(s)
        gs = surface.gamma_s(s)
        ratio = sg / gam if gam != 0.0 else 0.0
        gso = gs_over_gamma(surface, params, s)
        dv = gs * ratio * sg - v / a - gso * gam / (a * a) + mu * gam + (c / a) * sg
        dsg = -gs * ratio * v - sg / a - (c / a) * v
        return (v, dv, dsg)
    if formulation != REDUCED:
        raise DomainError(f"unknown formulation {formulation!r}")
    dv = -v / a + params.mu * surface.gamma(s) - potential_gradient(surface, params, s) / (a * a)
    # sigma = -(c/a) F/Gamma, with (F/Gamma)' = 1 - Gamma_s F / Gamma^2
    fg = surface.f_over_gamma(s)
    fg_prime = 1.0 - surface.gamma_s(s) * surface.f_over_gamma2(s)
    dsg = params.c * fg / (a * a) - (params.c / a) * fg_prime * v
    return (v, dv, dsg)


def energy(surface: SurfaceProfile, params: WaveParameters, state: ProfileState) -> float:
    """E(a) = (a^2/2)(s_a^2 + sigma^2) + G(s) - mu a^2 F(s)."""
    a = state.a
    kin = 0.5 * a * a * (state.s_a ** 2 + state.sigma ** 2)
    return (kin + capG(surface, params, state.s)
            - params.mu * a * a * surface.capF(state.s))


class ProfileTrajectory:
    """Solved profile with dense evaluation, monitors, and CSV export."""

    def __init__(self, surface, params, traj: Trajectory, formulation, log_time,
                 seed_spec=None):
        self.surface = surface
        self.params = params
        self.traj = traj
        self.formulation = formulation
        self.log_time = log_time
        self.seed_spec = seed_spec

    # -- basic geometry of the run

    @property
    def a(self) -> np.ndarray:
        """Accepted-step radii, ascending."""
        return np.exp(self.traj.t) if self.log_time else self.traj.t

    @property
    def a_begin(self) -> float:
        return float(self.a[0])

    @property
    def a_end(self) -> float:
        return float(self.a[-1])

    @property
    def reason(self) -> str:
        return self.traj.reason

    def _tvals(self, a):
        a = np.asarray(a, dtype=float)
        if np.any(a <= 0.0) and self.log_time:
            raise DomainError("profile trajectories live on a > 0")
        return np.log(a) if self.log_time else a

    # -- state evaluation

    def states(self, a):
        """(s, s_a, sigma) rows at the requested radii."""
        scalar = np.ndim(a) == 0
        a_arr = np.atleast_1d(np.asarray(a, dtype=float))
        y = np.atleast_2d(self.traj(self._tvals(a_arr)))
        s = y[:, 0]
        v = y[:, 1]
        if self.formulation == FULL:
            sg = y[:, 2]
        else:
            fg = np.array([self.surface.f_over_gamma(x) for x in s])
            sg = -(self.params.c / a_arr) * fg
        out = np.column_stack([s, v, sg])
        return out[0] if scalar else out

    def state(self, a: float) -> ProfileState:
        s, v, sg = self.states(float(a))
        return ProfileState(a=float(a), s=float(s), s_a=float(v), sigma=float(sg))

    def s(self, a):
        st = self.states(a)
        return st[..., 0] if st.ndim > 1 else st[0]

    def s_a(self, a):
        st = self.states(a)
        return st[..., 1] if st.ndim > 1 else st[1]

    def sigma(self, a):
        st = self.states(a)
        return st[..., 2] if st.ndim > 1 else st[2]

    def energy_at(self, a):
        a_arr = np.atleast_1d(np.asarray(a, dtype=float))
        st = np.atleast_2d(self.states(a_arr))
        vals = np.array([energy(self.surface, self.params,
                                ProfileState(ai, *row)) for ai, row in zip(a_arr, st)])
        return float(vals[0]) if np.ndim(a) == 0 else vals

    # -- dense sampling over accepted segments

    def _segment_arrays(self):
        if not hasattr(self, "_segs"):
            segs = self.traj._dense
            self._segs = (np.array([s[0] for s in segs]),
                          np.array([s[1] for s in segs]),
                          np.array([s[2] for s in segs]),
                          np.array([s[3] for s in segs]))
        return self._segs

    def dense_samples(self, per_step: int = 4):
        """(a, states) on a mesh with per_step interior nodes per step."""
        t0, h, y0, q = self._segment_arrays()
        theta = np.linspace(0.0, 1.0, per_step + 1)[1:]
        powers = theta[:, None] ** np.arange(1, 5)[None, :]
        y = y0[:, None, :] + np.einsum("sdp,kp->skd", q, powers)
        t = t0[:, None] + h[:, None] * theta[None, :]
        t_flat = np.concatenate([[self.traj.t[0]], t.ravel()])
        y_flat = np.vstack([self.traj.y[:1], y.reshape(-1, y.shape[-1])])
        a = np.exp(t_flat) if self.log_time else t_flat
        s = y_flat[:, 0]
        v = y_flat[:, 1]
        if self.formulation == FULL:
            sg = y_flat[:, 2]
        else:
            fg = np.array([self.surface.f_over_gamma(x) for x in s])
            sg = -(self.params.c / a) * fg
        return a, np.column_stack([s, v, sg])

    # -- monitors

    def sigma_identity_residual(self, per_step: int = 4) -> float:
        """max |a Gamma sigma + c F| / (1 + |c F|) over dense samples."""
        a, st = self.dense_samples(per_step)
        gam = self.surface.gamma_arr(st[:, 0])
        f = self.surface.capF_arr(st[:, 0])
        cf = self.params.c * f
        res = np.abs(a * gam * st[:, 2] + cf) / (1.0 + np.abs(cf))
        return float(np.max(res))

    def _cumulative_drive(self):
        # knot values of J(a) = int 2 mu a' F(s) da' from the first knot
        if not hasattr(self, "_cumJ"):
            t0, h, y0, q = self._segment_arrays()
            powers = _GL_THETA[:, None] ** np.arange(1, 5)[None, :]
            y = y0[:, None, :] + np.einsum("sdp,kp->skd", q, powers)
            t = t0[:, None] + h[:, None] * _GL_THETA[None, :]
            a = np.exp(t) if self.log_time else t
            f = self.surface.capF_arr(y[:, :, 0])
            jac = a if self.log_time else 1.0  # da = a dtau in log time
            g = 2.0 * self.params.mu * a * f * jac
            steps = (g * _GL_WEIGHT[None, :]).sum(axis=1) * h
            self._cumJ = np.concatenate([[0.0], np.cumsum(steps)])
        return self._cumJ

    def _drive_integral(self, a1: float, a2: float) -> float:
        """int_{a1}^{a2} 2 mu a F(s(a)) da via per-segment Gauss rules."""
        t0, h, y0, q = self._segment_arrays()
        if h[0] < 0:
            raise DomainError("energy monitors expect forward trajectories")
        cum = self._cumulative_drive()
        tq1, tq2 = self._tvals(np.array([a1, a2]))

        def partial(tv):
            # contribution of [t0[i], tv] inside segment i
            i = int(np.clip(np.searchsorted(t0, tv, side="right") - 1,
                            0, len(h) - 1))
            frac = (tv - t0[i]) / h[i]
            theta = _GL_THETA * frac
            powers = theta[:, None] ** np.arange(1, 5)[None, :]
            y = y0[i] + powers @ q[i].T
            t = t0[i] + h[i] * theta
            a = np.exp(t) if self.log_time else t
            f = self.surface.capF_arr(y[:, 0])
            jac = a if self.log_time else 1.0
            g = 2.0 * self.params.mu * a * f * jac
            return cum[i] + float((g * _GL_WEIGHT).sum() * h[i] * frac)

        return partial(tq2) - partial(tq1)

    def energy_law_defect(self, a1: float, a2: float) -> float:
        """E(a2) - E(a1) + int_{a1}^{a2} 2 mu a F da (zero for exact flows)."""
        e1 = self.energy_at(a1)
        e2 = self.energy_at(a2)
        return float(e2 - e1 + self._drive_integral(a1, a2))

    def min_pole_distance(self) -> float:
        if not self.surface.compact:
            return math.inf
        _a, st = self.dense_samples(2)
        return float(np.min(self.surface.s0 - np.abs(st[:, 0])))

    # -- smooth interpolants used by field assembly

    @property
    def tau_knots(self):
        return self.traj.t if self.log_time else np.log(self.traj.t)

    def s_spline(self):
        """Cubic Hermite interpolant of s(tau); matches knot values and slopes."""
        if not hasattr(self, "_s_spl"):
            tau = self.tau_knots
            a = self.a
            s = self.traj.y[:, 0]
            dsdtau = a * self.traj.y[:, 1]
            self._s_spl = CubicHermiteSpline(tau, s, dsdtau)
        return self._s_spl

    # -- export

    def knot_table(self):
        """Columns (a, s, s_a, sigma, energy) at accepted steps."""
        a = self.a
        s = self.traj.y[:, 0]
        v = self.traj.y[:, 1]
        if self.formulation == FULL:
            sg = self.traj.y[:, 2]
        else:
            fg = np.array([self.surface.f_over_gamma(x) for x in s])
            sg = -(self.params.c / a) * fg
        gam = self.surface.gamma_arr(s)
        f = self.surface.capF_arr(s)
        g = np.array([capG(self.surface, self.params, x) for x in s])
        e = 0.5 * a * a * (v * v + sg * sg) + g - self.params.mu * a * a * f
        return a, s, v, sg, e

    def to_csv(self, fh):
        """Write `a,s,s_a,sigma,energy` rows, 17 significant digits."""
        close = False
        if isinstance(fh, (str, bytes)):
            fh = open(fh, "w")
            close = True
        try:
            fh.write("a,s,s_a,sigma,energy\n")
            for row in zip(*self.knot_table()):
                fh.write(",".join(f"{x:.16e}" for x in row) + "\n")
        finally:
            if close:
                fh.close()


def check_sigma_identity(traj: ProfileTrajectory, per_step: int = 4) -> float:
    """Max relative residual of the angular first integral a Gamma sigma + c F."""
    return traj.sigma_identity_residual(per_step)


def check_energy_law(traj: ProfileTrajectory, n_intervals: int = 100,
                     rng_seed: int = 20260814) -> float:
    """Worst normalized energy-law defect over random sub-intervals.

    Endpoints are drawn log-uniformly over the covered radii; the defect on
    [a1, a2] is normalized by 1 + |E(a1)|.
    """
    rng = np.random.default_rng(rng_seed)
    lo, hi = math.log(traj.a_begin), math.log(traj.a_end)
    worst = 0.0
    for _ in range(n_intervals):
        p = np.sort(rng.uniform(lo, hi, size=2))
        a1, a2 = math.exp(p[0]), math.exp(p[1])
        d = traj.energy_law_defect(a1, a2)
        worst = max(worst, abs(d) / (1.0 + abs(traj.energy_at(a1))))
    return worst


def solve_profile(surface: SurfaceProfile, params: WaveParameters, seed: SeedSpec,
                  a_max: float = 500.0, cfg: IntegrationConfig | None = None,
                  formulation: str = REDUCED, log_time: bool = True,
                  exploratory: bool = False) -> ProfileTrajectory:
    """Integrate the seeded profile from a_seed to a_max.

    Termination anywhere short of a_max raises IntegrationError (with the
    partial trajectory attached) unless `exploratory` is set, in which case
    blow-up past cfg.blowup_norm is returned as a regular trajectory; that
    path exists for the non-compact mu > 0 runs whose profiles genuinely
    leave every bounded set.
    """
    cfg = cfg or IntegrationConfig()
    if formulation not in (REDUCED, FULL):
        raise DomainError(f"unknown formulation {formulation!r}")
    if a_max <= seed.a_seed:
        raise DomainError("a_max must exceed a_seed")
    st = seed_state(surface, params, seed)
    if formulation == REDUCED:
        y0 = [st.s, st.s_a]
        rhs = make_reduced_rhs(surface, params, log_time)
    else:
        y0 = [st.s, st.s_a, st.sigma]
        rhs = make_full_rhs(surface, params, log_time)

    events = []
    if surface.compact:
        margin = 1e-6 * max(1.0, surface.s0)
        guard = surface.s0 - margin
        events.append(Event("pole_contact", lambda t, y: guard - abs(y[0]),
                            direction=-1, terminal=True))

    span = ((math.log(seed.a_seed), math.log(a_max)) if log_time
            else (seed.a_seed, a_max))
    try:
        traj = integrate(rhs, span, y0, cfg, events=events)
    except IntegrationError as exc:
        if exc.trajectory is not None:
            exc.trajectory = ProfileTrajectory(surface, params, exc.trajectory,
                                               formulation, log_time, seed)
        raise
    out = ProfileTrajectory(surface, params, traj, formulation, log_time, seed)
    if traj.reason == REACHED_END:
        return out
    if traj.reason == BLOWUP and exploratory:
        return out
    if traj.reason == EVENT:
        raise IntegrationError(
            f"profile touched the guarded pole region at a = {out.a_end:.6g}; "
            "the continuation past this point is not trustworthy", out)
    if traj.reason == BLOWUP:
        raise IntegrationError(
            f"profile exceeded the blow-up norm at a = {out.a_end:.6g} "
            "(pass exploratory=True to keep such runs)", out)
    raise IntegrationError(f"integration stopped early ({traj.reason}) "
                           f"at a = {out.a_end:.6g}", out)


@dataclass(frozen=True)
class ProbeReport:
    jacobian_spectrum: tuple
    unstable_axis: str
    min_q_ratio: float | None


def radial_probe(surface: SurfaceProfile, params: WaveParameters,
                 cfg: IntegrationConfig | None = None,
                 s_at_one: float = 1e-2, s_a_at_one: float = 0.0) -> ProbeReport:
    """Obstruction probe for radial (k = 0) waves.

    (i) The c = 0 origin linearization of (s, rho = a s_a, a) in tau-time
    has spectrum {0, 0, 1} with the only unstable direction along a, so no
    nontrivial radial wave leaves the origin.  The Jacobian is formed by
    central differences of the actual right-hand side.

    (ii) For c != 0 the quantity Q(a) = a^2 s_a^2 + c^2 F^2/Gamma^2 obeys a
    Gronwall bound that forbids Q reaching zero at a = 0; the probe
    integrates backwards from a = 1 data and reports min Q / Q(1) over
    [1e-6, 1].
    """
    if params.k != 0.0:
        raise DomainError("the radial probe applies to k = 0 only")
    cfg = cfg or IntegrationConfig()
    mu = params.mu

    def f0(z):
        s, rho, a = z
        return np.array([rho, mu * a * a * surface.gamma(s), a])

    h = 1e-7
    jac = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        jac[:, j] = (f0(e) - f0(-e)) / (2.0 * h)
    eigvals, eigvecs = np.linalg.eig(jac)
    order = np.argsort(eigvals.real)
    spectrum = tuple(float(v) for v in eigvals.real[order])
    top = np.abs(eigvecs[:, order[-1]].real)
    unstable_axis = "a" if top[2] > 0.99 and max(top[0], top[1]) < 1e-12 else "mixed"

    min_q_ratio = None
    if params.c != 0.0:
        rhs = make_reduced_rhs(surface, params, log_time=True)
        traj = integrate(rhs, (0.0, math.log(1e-6)), [s_at_one, s_a_at_one], cfg)
        prof = ProfileTrajectory(surface, params, traj, REDUCED, log_time=True)
        a, st = prof.dense_samples(4)
        fg = np.array([surface.f_over_gamma(x) for x in st[:, 0]])
        q = (a * st[:, 1]) ** 2 + (params.c * fg) ** 2
        min_q_ratio = float(np.min(q) / q[0])
    return ProbeReport(jacobian_spectrum=spectrum, unstable_axis=unstable_axis,
                       min_q_ratio=min_q_ratio)
