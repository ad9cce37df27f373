"""Surface-of-revolution targets and the scalar potentials they induce.

The target carries a warped metric ds^2 + Gamma(s)^2 dbeta^2 with Gamma odd
and vanishing at s = 0 (and again at s = s0 when the surface closes up, as on
the round sphere where Gamma = sin s and s0 = pi).  Everything downstream
needs only Gamma, its derivative, the antiderivative F(s) = int_0^s Gamma,
and a handful of combinations with removable singularities at the poles:

    G      = (k^2/2) Gamma^2 + b k F - k^2 F^2
    Gtilde = -(F^2 / (2 Gamma^2))_s = Gamma_s F^2 / Gamma^3 - F / Gamma
    H      = -2 G + 4 mu c F + 4 mu^2 Gamma^2

Near s = 0 the raw formulas for Gtilde, F/Gamma and F/Gamma^2 divide one
vanishing quantity by another, so below SERIES_EPS they switch to Taylor
polynomials in s^2 whose coefficients come from the odd jet

    Gamma = s + g3 s^3/6 + g5 s^5/120 + g7 s^7/5040.

Near the far pole of a compact target the potential gradient
(G + c^2 F^2/(2 Gamma^2))_s blows up like the centrifugal barrier
c^2 F(s0)^2 / (s0-s)^3; inside POLE_SWITCH of s0 it is evaluated in the
reflected variable st = s0 - s through Gamma1(st) = Gamma(s0-st) and
F1(st) = F(s0) - F(s0-st) so no precision is lost to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DomainError, RegimeError

# below this |s|, ratio-type functions use their s^2 Taylor polynomials;
# truncation of the s^7 jet is ~1e-24 relative there, far under roundoff
SERIES_EPS = 1e-4

# within this distance of s0 on a compact target, gradients switch to the
# reflected variable st = s0 - s
POLE_SWITCH = 0.1

SPHERE = "sphere"
PSEUDOSPHERE = "pseudosphere"
CUSTOM = "custom"

# scan cap for root searches on non-compact targets
_S_SCAN_CAP = 50.0


def _horner_even(coeffs, s):
    """Sum of coeffs[i] * s^(2i), highest order first absorbed by Horner."""
    u = s * s
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc


@dataclass(frozen=True)
class SurfaceProfile:
    """A warped-product target surface ds^2 + Gamma(s)^2 dbeta^2.

    Built-in kinds supply exact closed forms.  Custom profiles supply the
    callables `gamma_fn` and `gamma_s_fn` (vectorized over numpy arrays),
    the odd-jet coefficients gamma3 = Gamma'''(0) (and optionally gamma5,
    gamma7), and the half-period s0 (math.inf when the surface never
    closes).  F is then cached on a cubic spline fed by adaptive
    quadrature.
    """

    kind: str
    s0: float
    gamma3: float
    gamma5: float = 0.0
    gamma7: float = 0.0
    gamma_fn: Callable | None = None
    gamma_s_fn: Callable | None = None

    @staticmethod
    def sphere() -> "SurfaceProfile":
        return SurfaceProfile(kind=SPHERE, s0=math.pi, gamma3=-1.0, gamma5=1.0, gamma7=-1.0)

    @staticmethod
    def pseudosphere() -> "SurfaceProfile":
        return SurfaceProfile(kind=PSEUDOSPHERE, s0=math.inf, gamma3=1.0, gamma5=1.0, gamma7=1.0)

    @staticmethod
    def custom(gamma_fn: Callable, gamma_s_fn: Callable, gamma3: float,
               s0: float = math.inf, gamma5: float = 0.0, gamma7: float = 0.0) -> "SurfaceProfile":
        if s0 <= 0:
            raise DomainError("custom surface needs s0 > 0")
        return SurfaceProfile(kind=CUSTOM, s0=float(s0), gamma3=float(gamma3),
                              gamma5=float(gamma5), gamma7=float(gamma7),
                              gamma_fn=gamma_fn, gamma_s_fn=gamma_s_fn)

    @property
    def compact(self) -> bool:
        return math.isfinite(self.s0)

    # -- cached series coefficients (even polynomials in s, see module docstring)

    @cached_property
    def _fg_series(self):
        # F/Gamma = s * (1/2 + c1 s^2 + c2 s^4 + c3 s^6)
        g3, g5, g7 = self.gamma3, self.gamma5, self.gamma7
        return (0.5,
                -g3 / 24.0,
                g3 * g3 / 144.0 - g5 / 360.0,
                -g3 ** 3 / 864.0 + 7.0 * g3 * g5 / 8640.0 - g7 / 13440.0)

    @cached_property
    def _fg2_series(self):
        # F/Gamma^2 = 1/2 + d1 s^2 + d2 s^4 + d3 s^6
        g3, g5, g7 = self.gamma3, self.gamma5, self.gamma7
        return (0.5,
                -g3 / 8.0,
                g3 * g3 / 36.0 - g5 / 144.0,
                -5.0 * g3 ** 3 / 864.0 + 13.0 * g3 * g5 / 4320.0 - g7 / 5760.0)

    @cached_property
    def _tg_series(self):
        # Gtilde = s * (-1/4 + e1 s^2 + e2 s^4 + e3 s^6)
        g3, g5, g7 = self.gamma3, self.gamma5, self.gamma7
        return (-0.25,
                g3 / 12.0,
                -5.0 * g3 * g3 / 192.0 + g5 / 120.0,
                g3 ** 3 / 144.0 - g3 * g5 / 240.0 + g7 / 3360.0)

    @cached_property
    def _F_spline(self):
        # custom targets only: cumulative adaptive quadrature of gamma_fn
        # cached on a cubic spline over [0, min(s0, cap)]
        from scipy.integrate import quad
        from scipy.interpolate import CubicSpline

        top = min(self.s0, 2.0 * _S_SCAN_CAP)
        grid = np.linspace(0.0, top, 4001)
        vals = np.empty_like(grid)
        vals[0] = 0.0
        for i in range(1, len(grid)):
            seg, _ = quad(self.gamma_fn, grid[i - 1], grid[i], epsabs=1e-14, epsrel=1e-12)
            vals[i] = vals[i - 1] + seg
        return CubicSpline(grid, vals)

    # -- scalar evaluators (hot path for the integrators)

    def gamma(self, s: float) -> float:
        if self.kind == SPHERE:
            return math.sin(s)
        if self.kind == PSEUDOSPHERE:
            return math.sinh(s)
        return float(self.gamma_fn(s))

    def gamma_s(self, s: float) -> float:
        if self.kind == SPHERE:
            return math.cos(s)
        if self.kind == PSEUDOSPHERE:
            return math.cosh(s)
        return float(self.gamma_s_fn(s))

    def capF(self, s: float) -> float:
        # F is even; the half-angle forms avoid the 1 - cos cancellation
        if self.kind == SPHERE:
            return 2.0 * math.sin(0.5 * s) ** 2
        if self.kind == PSEUDOSPHERE:
            return 2.0 * math.sinh(0.5 * s) ** 2
        a = abs(s)
        if a > self._F_spline.x[-1]:
            raise DomainError(f"F cache covers |s| <= {self._F_spline.x[-1]:g}, got {s!r}")
        return float(self._F_spline(a))

    def f_over_gamma(self, s: float) -> float:
        """F/Gamma, odd in s with value s/2 + O(s^3) near the origin."""
        if abs(s) < SERIES_EPS:
            return s * _horner_even(self._fg_series, s)
        if self.kind == SPHERE:
            return math.tan(0.5 * s)
        if self.kind == PSEUDOSPHERE:
            return math.tanh(0.5 * s)
        if self.compact and self.s0 - abs(s) < POLE_SWITCH:
            st = self.s0 - abs(s)
            return math.copysign((self.capF(self.s0) - self.capF1(st)) / self.gamma1(st), s)
        return self.capF(s) / self.gamma(s)

    def f_over_gamma2(self, s: float) -> float:
        """F/Gamma^2, even in s with value 1/2 + O(s^2) near the origin."""
        if abs(s) < SERIES_EPS:
            return _horner_even(self._fg2_series, s)
        if self.kind == SPHERE:
            return 0.5 / math.cos(0.5 * s) ** 2
        if self.kind == PSEUDOSPHERE:
            return 0.5 / math.cosh(0.5 * s) ** 2
        if self.compact and self.s0 - abs(s) < POLE_SWITCH:
            st = self.s0 - abs(s)
            return (self.capF(self.s0) - self.capF1(st)) / self.gamma1(st) ** 2
        g = self.gamma(s)
        return self.capF(s) / (g * g)

    # -- reflected-pole evaluators, st = s0 - s, compact targets only.
    # On the sphere the reflection is an exact symmetry of sin, so the same
    # closed forms apply; custom compact targets fall back to wrapped calls.

    def gamma1(self, st: float) -> float:
        if self.kind == SPHERE:
            return math.sin(st)
        return float(self.gamma_fn(self.s0 - st))

    def gamma1_s(self, st: float) -> float:
        """d Gamma1 / d st = -Gamma_s(s0 - st)."""
        if self.kind == SPHERE:
            return math.cos(st)
        return -float(self.gamma_s_fn(self.s0 - st))

    def capF1(self, st: float) -> float:
        """F1(st) = F(s0) - F(s0 - st); on the sphere this equals F(st)."""
        if self.kind == SPHERE:
            return 2.0 * math.sin(0.5 * st) ** 2
        return self.capF(self.s0) - self.capF(self.s0 - st)

    # -- vectorized evaluators for grid and post-processing work

    def gamma_arr(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == SPHERE:
            return np.sin(s)
        if self.kind == PSEUDOSPHERE:
            return np.sinh(s)
        return np.asarray(self.gamma_fn(s), dtype=float)

    def gamma_s_arr(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == SPHERE:
            return np.cos(s)
        if self.kind == PSEUDOSPHERE:
            return np.cosh(s)
        return np.asarray(self.gamma_s_fn(s), dtype=float)

    def capF_arr(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == SPHERE:
            return 2.0 * np.sin(0.5 * s) ** 2
        if self.kind == PSEUDOSPHERE:
            return 2.0 * np.sinh(0.5 * s) ** 2
        return np.asarray(self._F_spline(np.abs(s)), dtype=float)

    def f_over_gamma2_arr(self, s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        small = np.abs(s) < SERIES_EPS
        out[small] = _horner_even(self._fg2_series, s[small])
        big = ~small
        if self.kind == SPHERE:
            out[big] = 0.5 / np.cos(0.5 * s[big]) ** 2
        elif self.kind == PSEUDOSPHERE:
            out[big] = 0.5 / np.cosh(0.5 * s[big]) ** 2
        else:
            g = self.gamma_arr(s[big])
            out[big] = self.capF_arr(s[big]) / (g * g)
        return out


def surface_eval(surface: SurfaceProfile, s: float):
    """(Gamma, Gamma_s, F) at a single s."""
    return surface.gamma(s), surface.gamma_s(s), surface.capF(s)


def capG(surface: SurfaceProfile, params, s: float) -> float:
    """G(s) = (k^2/2) Gamma^2 + b k F - k^2 F^2."""
    k, b = params.k, params.b
    if abs(s) < SERIES_EPS:
        g3, g5 = surface.gamma3, surface.gamma5
        k2 = k * k
        c0 = 0.5 * (k2 + b * k)
        c1 = b * k * g3 / 24.0 + k2 * (g3 / 6.0 - 0.25)
        c2 = b * k * g5 / 720.0 + k2 * (g3 * g3 / 72.0 - g3 / 24.0 + g5 / 120.0)
        return s * s * _horner_even((c0, c1, c2), s)
    g = surface.gamma(s)
    f = surface.capF(s)
    return 0.5 * k * k * g * g + b * k * f - k * k * f * f


def tildeG(surface: SurfaceProfile, s: float) -> float:
    """Gtilde(s) = Gamma_s F^2/Gamma^3 - F/Gamma = -s/4 + O(s^3)."""
    if abs(s) < SERIES_EPS:
        return s * _horner_even(surface._tg_series, s)
    if surface.compact and surface.s0 - abs(s) < POLE_SWITCH:
        st = surface.s0 - abs(s)
        g1 = surface.gamma1(st)
        fr = surface.capF(surface.s0) - surface.capF1(st)
        val = -surface.gamma1_s(st) * fr * fr / g1 ** 3 - fr / g1
        return math.copysign(val, s)
    g = surface.gamma(s)
    f = surface.capF(s)
    return surface.gamma_s(s) * f * f / g ** 3 - f / g


def gs_over_gamma(surface: SurfaceProfile, params, s: float) -> float:
    """G_s / Gamma = k^2 Gamma_s + b k - 2 k^2 F (regular everywhere)."""
    k, b = params.k, params.b
    return k * k * surface.gamma_s(s) + b * k - 2.0 * k * k * surface.capF(s)


def potential_gradient(surface: SurfaceProfile, params, s: float) -> float:
    """(G + c^2 F^2 / (2 Gamma^2))_s = G_s - c^2 Gtilde, odd in s.

    Inside POLE_SWITCH of a compact target's far pole the value is assembled
    from the reflected functions Gamma1, F1 so the centrifugal barrier
    ~ c^2 F(s0)^2 / st^3 comes out to full relative precision.
    """
    c = params.c
    if surface.compact and surface.s0 - abs(s) < POLE_SWITCH and abs(s) >= SERIES_EPS:
        k, b = params.k, params.b
        st = surface.s0 - abs(s)
        g1 = surface.gamma1(st)
        g1s = surface.gamma1_s(st)
        f0 = surface.capF(surface.s0)
        fr = f0 - surface.capF1(st)  # = F(s0 - st)
        val = (-k * k * g1 * g1s + b * k * g1 - 2.0 * k * k * fr * g1
               + c * c * fr / g1 + c * c * fr * fr * g1s / g1 ** 3)
        return math.copysign(val, s)
    return surface.gamma(s) * gs_over_gamma(surface, params, s) - c * c * tildeG(surface, s)


def capH(surface: SurfaceProfile, params, s: float) -> float:
    """H(s) = -2 G + 4 mu c F + 4 mu^2 Gamma^2.

    H(0) = 0 with H''(0)/2 = -(k^2 + b k) + 2 mu c + 4 mu^2, and on a
    compact target H(s0) = 2 F(s0) (2 mu c - b k + k^2 F(s0)).
    """
    mu, c = params.mu, params.c
    g = surface.gamma(s)
    return (-2.0 * capG(surface, params, s)
            + 4.0 * mu * c * surface.capF(s)
            + 4.0 * mu * mu * g * g)


def capH_curvature(params) -> float:
    """H''(0)/2; must be positive for H to rise from its double zero at 0."""
    return -(params.k ** 2 + params.b * params.k) + 2.0 * params.mu * params.c + 4.0 * params.mu ** 2


def s_one(surface: SurfaceProfile, params) -> float:
    """First positive zero of H, or math.inf if H stays positive.

    Scans a 4096-point grid on (0, min(s0, 50)] mixing logarithmic and
    linear spacing, then refines the first sign change by bisection to a
    relative tolerance of 1e-12.  Raises RegimeError when H''(0)/2 <= 0,
    since then H is not positive just above zero and no admissible height
    window exists.
    """
    if capH_curvature(params) <= 0.0:
        raise RegimeError("H''(0)/2 <= 0: H does not rise from s = 0")
    top = min(surface.s0, _S_SCAN_CAP)
    grid = np.unique(np.concatenate([
        np.geomspace(top * 1e-9, top, 2048),
        np.linspace(top / 2048.0, top, 2048),
    ]))

    def h(x):
        return capH(surface, params, x)

    lo = None
    prev_x, prev_v = None, None
    for x in grid:
        v = h(x)
        if prev_x is not None and prev_v > 0.0 >= v:
            lo, hi, vhi = prev_x, x, v
            break
        prev_x, prev_v = x, v
    else:
        return math.inf

    if vhi == 0.0:
        return float(hi)
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
