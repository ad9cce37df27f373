"""Unstable-manifold seeding of profile trajectories near a = 0.

In Case I the origin of the (s, a s_a, a sigma, a)-dynamics has a
one-parameter unstable family along which s ~ q0 a^kappa.  The seed places
the integrator on that family at a small a_seed:

    s      = q0 a^kappa
    s_a    = kappa q0 a^(kappa-1)
    sigma  = -c F(s) / (a Gamma(s))

The sigma value is the exact first integral of the angular equation, so the
only seeding error is the truncation of the manifold expansion, which
enters at relative order a_seed^min(2 kappa, 2) and is checked empirically
by validate_seed: integrating from a_seed and from a_seed/4 to a common
matching radius must agree to the requested consistency tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, RegimeError
from .regimes import CASE_I, WaveParameters, classify
from .surface import SERIES_EPS, SurfaceProfile


@dataclass(frozen=True)
class SeedSpec:
    q0: float
    a_seed: float = 1e-6
    consistency_tol: float = 1e-8


@dataclass(frozen=True)
class ProfileState:
    a: float
    s: float
    s_a: float
    sigma: float


def seed_state(surface: SurfaceProfile, params: WaveParameters,
               spec: SeedSpec) -> ProfileState:
    """Profile state on the q0-family at a = a_seed (Case I only)."""
    report = classify(params)
    if report.case != CASE_I:
        raise RegimeError(f"seeding needs Case I, parameters classify as {report.case}")
    if spec.a_seed <= 0.0:
        raise DomainError("a_seed must be positive")
    kappa = report.kappa
    s = spec.q0 * spec.a_seed ** kappa
    if abs(s) >= SERIES_EPS:
        raise DomainError(
            f"seed amplitude |q0| a_seed^kappa = {abs(s):.3e} leaves the "
            f"series-accurate region (< {SERIES_EPS:g}); shrink a_seed or q0")
    s_a = kappa * spec.q0 * spec.a_seed ** (kappa - 1.0)
    sigma = -(params.c / spec.a_seed) * surface.f_over_gamma(s)
    return ProfileState(a=spec.a_seed, s=s, s_a=s_a, sigma=sigma)


def validate_seed(surface: SurfaceProfile, params: WaveParameters,
                  spec: SeedSpec, a_match: float, cfg=None) -> float:
    """Relative (s, s_a, sigma) discrepancy at a_match between trajectories
    seeded at a_seed and at a_seed/4.

    The discrepancy shrinks with the seeding truncation order, so values
    above spec.consistency_tol indicate either a bad seed radius or a
    tolerance mismatch.
    """
    from .profile import solve_profile

    if a_match <= spec.a_seed:
        raise DomainError("a_match must exceed a_seed")
    fine = SeedSpec(q0=spec.q0, a_seed=spec.a_seed / 4.0,
                    consistency_tol=spec.consistency_tol)
    y_coarse = solve_profile(surface, params, spec, a_max=a_match, cfg=cfg).states(a_match)
    y_fine = solve_profile(surface, params, fine, a_max=a_match, cfg=cfg).states(a_match)
    worst = 0.0
    for u, v in zip(y_coarse, y_fine):
        scale = max(abs(u), abs(v), 1e-300)
        worst = max(worst, abs(u - v) / scale if max(abs(u), abs(v)) > 0 else 0.0)
    return worst
