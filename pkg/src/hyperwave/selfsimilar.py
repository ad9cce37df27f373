"""Self-similar profiles in the similarity radius r = a t^{-1/2}.

The horizontal-cone similarity system is

    s_rr    = (Gamma_s/Gamma) sigma^2 - s_r/r - G_s/r^2 + mu Gamma + (c/r - r/2) sigma
    sigma_r = -(Gamma_s/Gamma) sigma s_r - sigma/r + (r/2 - c/r) s_r,

the hyperbolic profile system plus one extra r/2 term; the vertical-cone
variant flips that term's sign (and is used with the mu-negated parameter
set).  Here sigma admits no algebraic elimination, so the three-state system
is primary and the conserved quantity

    r^2 (s_r^2 + (sigma - 2 mu Gamma/r)^2) = H(s),
    H = -2G + 4 mu c F + 4 mu^2 Gamma^2

is the independent accuracy monitor: it vanishes at the seed and stays zero
along exact flows, and since the left side is nonnegative it also confines
s below the first positive zero of H.
"""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass

from .errors import DomainError, IntegrationError, RegimeError
from .odeint import BLOWUP, EVENT, REACHED_END, IntegrationConfig, Event, integrate
from .profile import FULL, ProfileTrajectory, make_full_rhs
from .regimes import WaveParameters
from .seed import SeedSpec, seed_state
from .surface import SurfaceProfile, capH, s_one


@dataclass(frozen=True)
class SelfSimilarState:
    r: float
    s: float
    s_r: float
    sigma: float


def polar_pair(surface: SurfaceProfile, params: WaveParameters,
               state: SelfSimilarState) -> tuple:
    """Tail polar coordinates (h, theta) with h^2 = H(s) and
    (s_r, sigma - 2 mu Gamma/r) = (h/r)(cos theta, sin theta)."""
    h2 = capH(surface, params, state.s)
    h = math.sqrt(max(h2, 0.0))
    shifted = state.sigma - 2.0 * params.mu * surface.gamma(state.s) / state.r
    return h, math.atan2(shifted, state.s_r)


def selfsim_rhs(surface: SurfaceProfile, params: WaveParameters,
                state: SelfSimilarState, vertical: bool = False):
    """Pointwise (ds/dr, ds_r/dr, dsigma/dr); vertical flips the r/2 term."""
    gam = surface.gamma(state.s)
    if gam == 0.0 and state.s != 0.0:
        raise DomainError(f"angular coefficient undefined at s = {state.s!r}")
    rhs = make_full_rhs(surface, params, log_time=False,
                        half_sign=1.0 if vertical else -1.0)
    d = rhs(state.r, np.array([state.s, state.s_r, state.sigma]))
    return float(d[0]), float(d[1]), float(d[2])


class SelfSimilarTrajectory(ProfileTrajectory):
    """Solved similarity profile; radii are exposed as r instead of a."""

    def __init__(self, surface, params, traj, log_time, seed_spec=None,
                 vertical=False):
        super().__init__(surface, params, traj, FULL, log_time, seed_spec)
        self.vertical = vertical

    @property
    def r(self) -> np.ndarray:
        return self.a

    @property
    def r_begin(self) -> float:
        return self.a_begin

    @property
    def r_end(self) -> float:
        return self.a_end

    def _h_residual(self, r, st):
        # completing the square in the conserved combination gives, for the
        # r/2-sign h = -/+1, the shift sigma + 2h mu Gamma/r and H taken at -h mu
        h_sign = 1.0 if self.vertical else -1.0
        mu = self.params.mu
        gam = self.surface.gamma_arr(st[:, 0])
        shifted = st[:, 2] + h_sign * 2.0 * mu * gam / r
        lhs = r * r * (st[:, 1] ** 2 + shifted ** 2)
        pmu = WaveParameters(mu=-h_sign * mu, k=self.params.k,
                             c=self.params.c, b=self.params.b)
        h = np.array([capH(self.surface, pmu, x) for x in st[:, 0]])
        return np.abs(lhs - h) / (1.0 + np.abs(h))

    def h_invariant_residual(self, per_step: int = 4) -> float:
        r, st = self.dense_samples(per_step)
        return float(np.max(self._h_residual(r, st)))

    def to_csv(self, fh):
        """Write `r,s,s_r,sigma,H_residual` rows, 17 significant digits."""
        close = False
        if isinstance(fh, (str, bytes)):
            fh = open(fh, "w")
            close = True
        try:
            fh.write("r,s,s_r,sigma,H_residual\n")
            r = self.r
            st = self.traj.y
            res = self._h_residual(r, st)
            for row in zip(r, st[:, 0], st[:, 1], st[:, 2], res):
                fh.write(",".join(f"{x:.16e}" for x in row) + "\n")
        finally:
            if close:
                fh.close()


def check_H_invariant(traj: SelfSimilarTrajectory, per_step: int = 4) -> float:
    """Max of |r^2(s_r^2 + (sigma - 2 mu Gamma/r)^2) - H(s)| / (1 + |H(s)|)."""
    return traj.h_invariant_residual(per_step)


def solve_selfsimilar(surface: SurfaceProfile, params: WaveParameters,
                      seed: SeedSpec, r_max: float = 100.0,
                      cfg: IntegrationConfig | None = None,
                      log_time: bool = True,
                      vertical: bool = False) -> SelfSimilarTrajectory:
    """Integrate the seeded similarity profile from r_seed to r_max.

    Seeding matches the hyperbolic case: s = q0 r^kappa with
    sigma = -(c/r) F/Gamma, which is -(c/2) s/r at leading order and accurate
    to relative O(r^2) here.  Early termination is always an error; on
    compact targets global existence is known, so blow-up or pole contact
    signals integration inaccuracy, not physics.
    """
    cfg = cfg or IntegrationConfig()
    if r_max <= seed.a_seed:
        raise DomainError("r_max must exceed the seed radius")
    st = seed_state(surface, params, seed)
    rhs = make_full_rhs(surface, params, log_time,
                        half_sign=1.0 if vertical else -1.0)
    y0 = [st.s, st.s_a, st.sigma]
    events = []
    if surface.compact:
        margin = 1e-6 * max(1.0, surface.s0)
        guard = surface.s0 - margin
        events.append(Event("pole_contact", lambda t, y: guard - abs(y[0]),
                            direction=-1, terminal=True))
    span = ((math.log(seed.a_seed), math.log(r_max)) if log_time
            else (seed.a_seed, r_max))
    try:
        traj = integrate(rhs, span, y0, cfg, events=events)
    except IntegrationError as exc:
        if exc.trajectory is not None:
            exc.trajectory = SelfSimilarTrajectory(surface, params, exc.trajectory,
                                                   log_time, seed, vertical)
        raise
    out = SelfSimilarTrajectory(surface, params, traj, log_time, seed, vertical)
    if traj.reason == REACHED_END:
        return out
    if traj.reason == EVENT:
        raise IntegrationError(
            f"similarity profile touched the guarded pole region at "
            f"r = {out.r_end:.6g}, which contradicts the conserved-quantity "
            "ceiling; tighten tolerances", out)
    if traj.reason == BLOWUP:
        raise IntegrationError(
            f"similarity profile exceeded the blow-up norm at r = {out.r_end:.6g}",
            out)
    raise IntegrationError(f"integration stopped early ({traj.reason}) "
                           f"at r = {out.r_end:.6g}", out)


def estimate_s_star(traj: SelfSimilarTrajectory, surface=None, params=None,
                    tail_fraction: float = 0.8):
    """Tail limit s_star and its approach rate.

    s_star is the mean of s over [tail_fraction * r_max, r_max]; the rate is
    the slope of log|s - s_star| against log r over the preceding decade.
    Returns (s_star, rate); rate is None when the regression is degenerate.
    The limit is checked against its ceilings: 0 < s_star <= min(s0, s1) and
    H(s_star) >= -1e-8.
    """
    surface = surface if surface is not None else traj.surface
    params = params if params is not None else traj.params
    r_max = traj.r_end
    if r_max < 50.0:
        raise DomainError("s_star estimation needs a tail reaching r >= 50")
    tail = np.linspace(tail_fraction * r_max, r_max, 2000)
    s_tail = traj.states(tail)[:, 0]
    s_star = float(np.mean(s_tail))
    spread = float(s_tail.max() - s_tail.min())
    if spread > 1e-2 * (1.0 + abs(s_star)):
        return None, None

    lo = max(traj.r_begin, tail_fraction * r_max / 10.0)
    rr = np.geomspace(lo, tail_fraction * r_max, 400)
    dev = np.abs(traj.states(rr)[:, 0] - s_star)
    keep = dev > 1e-13
    rate = None
    if keep.sum() >= 50:
        rate = float(np.polyfit(np.log(rr[keep]), np.log(dev[keep]), 1)[0])

    try:
        s1 = s_one(surface, params)
    except RegimeError:
        s1 = math.inf
    ceiling = min(surface.s0, s1)
    if not (0.0 < abs(s_star) <= ceiling * (1.0 + 1e-9)):
        raise DomainError(f"tail limit {s_star!r} violates the ceiling "
                          f"min(s0, s1) = {ceiling!r}")
    if capH(surface, params, s_star) < -1e-8:
        raise DomainError("tail limit lies in the H < 0 forbidden region")
    return s_star, rate


def interior_star_condition(surface: SurfaceProfile, params: WaveParameters) -> bool:
    """True iff kappa is real and 2 mu c - b k + k^2 F(s0) < 0, which pins
    the tail limit strictly inside (0, s0); equivalent to H(s0) < 0."""
    if not surface.compact:
        raise DomainError("the interior-limit condition needs a compact target")
    kk = params.k ** 2 + params.b * params.k
    if not (params.c ** 2 < -4.0 * kk):
        return False
    return (2.0 * params.mu * params.c - params.b * params.k
            + params.k ** 2 * surface.capF(surface.s0)) < 0.0


def selfsim_summary(traj: SelfSimilarTrajectory) -> dict:
    """JSON-ready {s_star, rate, s_one, interior_condition}."""
    try:
        s_star, rate = estimate_s_star(traj)
    except DomainError:
        s_star, rate = None, None
    try:
        s1 = s_one(traj.surface, traj.params)
    except RegimeError:
        s1 = math.inf
    interior = (interior_star_condition(traj.surface, traj.params)
                if traj.surface.compact else None)
    return {"s_star": s_star, "rate": rate,
            "s_one": None if math.isinf(s1) else s1,
            "interior_condition": interior}
