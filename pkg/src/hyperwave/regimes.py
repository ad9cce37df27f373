"""Parameter regimes of the equivariant profile system near the origin.

The seeded dynamics on the invariant plane {a = 0, s = 0} reduces, in polar
variables (r, gamma) for the rescaled gradient (a s_a / Gamma, a sigma / Gamma),
to motion on the circle r0^2 = -(k^2 + b k).  With kk = k^2 + b k:

    kk > 0   no invariant circle; only the trivial equivariant wave survives
    kk = 0   degenerate (k = 0 or b = -k)
    kk < 0   three regimes decided by c^2 against -4 kk:
       Case I    c^2 < -4 kk: hyperbolic fixed points on the circle at
                 cos gamma_pm = +-sqrt(1 + c^2/(4 kk)), sin gamma_pm = -c/(2 r0);
                 linearization spectrum (kappa, -2 kappa, -2 kappa, 1) with
                 kappa = sqrt(-kk - c^2/4), so one-parameter families of
                 profiles s ~ q0 a^kappa leave the origin
       Case II   c^2 = -4 kk: the two fixed points merge (kappa = 0)
       Case III  c^2 > -4 kk: no fixed points; the return map of the circle
                 flow gamma' = 2 r0 sin gamma + c has multiplier
                 lambda = exp(-int_0^{2pi} dgamma / (2 r0 sin gamma + c)),
                 which is > 1 exactly when c < 0
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .errors import RegimeError

CASE_I = "CaseI"
CASE_II = "CaseII"
CASE_III = "CaseIII"
DEGENERATE = "Degenerate_b_eq_minus_k"
POSITIVE_K2_BK = "Positive_k2_bk"


@dataclass(frozen=True)
class WaveParameters:
    """Frequency mu, equivariance index k, and phase coefficients c, b."""

    mu: float
    k: float
    c: float
    b: float

    def __post_init__(self):
        for name in ("mu", "k", "c", "b"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def kk(self) -> float:
        return self.k * self.k + self.b * self.k


@dataclass(frozen=True)
class RegimeReport:
    case: str
    kappa: float | None = None
    r0: float | None = None
    cos_gamma_plus: float | None = None
    jacobian_eigenvalues: tuple | None = None
    monodromy_lambda: float | None = None


def vertical_params(params: WaveParameters) -> WaveParameters:
    """Parameters whose profiles fill the vertical cones: mu flips sign."""
    return WaveParameters(mu=-params.mu, k=params.k, c=params.c, b=params.b)


def classify(params: WaveParameters) -> RegimeReport:
    """Total classification of (mu, k, c, b); never raises."""
    kk = params.kk
    if kk > 0.0:
        return RegimeReport(case=POSITIVE_K2_BK)
    if kk == 0.0:
        return RegimeReport(case=DEGENERATE)
    r0 = math.sqrt(-kk)
    disc = params.c * params.c + 4.0 * kk
    if disc > 0.0:
        return RegimeReport(case=CASE_III, r0=r0,
                            monodromy_lambda=monodromy_lambda(params))
    kappa = math.sqrt(-disc) / 2.0
    cos_gp = math.sqrt(max(0.0, 1.0 + params.c * params.c / (4.0 * kk)))
    if disc == 0.0:
        return RegimeReport(case=CASE_II, kappa=0.0, r0=r0, cos_gamma_plus=cos_gp)
    return RegimeReport(case=CASE_I, kappa=kappa, r0=r0, cos_gamma_plus=cos_gp,
                        jacobian_eigenvalues=(kappa, -2.0 * kappa, -2.0 * kappa, 1.0))


def monodromy_lambda(params: WaveParameters) -> float:
    """Circle-flow multiplier in Case III, by adaptive quadrature.

    lambda = exp(-I) with I = int_0^{2pi} dgamma / (2 r0 sin gamma + c).
    The integrand has no pole since |c| > 2 r0 in Case III.
    """
    kk = params.kk
    if kk >= 0.0 or params.c * params.c + 4.0 * kk <= 0.0:
        raise RegimeError("monodromy multiplier exists only in Case III")
    r0 = math.sqrt(-kk)
    c = params.c
    val, _err = quad(lambda g: 1.0 / (2.0 * r0 * math.sin(g) + c),
                     0.0, 2.0 * math.pi, limit=200, epsabs=1e-14, epsrel=1e-13)
    return math.exp(-val)


def monodromy_lambda_closed_form(params: WaveParameters) -> float:
    """Residue evaluation of the same integral: exp(-2 pi sgn(c)/sqrt(c^2 + 4 kk))."""
    kk = params.kk
    if kk >= 0.0 or params.c * params.c + 4.0 * kk <= 0.0:
        raise RegimeError("monodromy multiplier exists only in Case III")
    root = math.sqrt(params.c * params.c + 4.0 * kk)
    return math.exp(-math.copysign(2.0 * math.pi, params.c) / root)
