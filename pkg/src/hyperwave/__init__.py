"""Equivariant standing waves of the hyperbolic-hyperbolic spin field.

Profiles live on surfaces of revolution (sphere or pseudosphere), are seeded
at the light cone by a Frobenius series, integrated outward with an embedded
Runge-Kutta pair, classified asymptotically, and assembled into full plane
fields with their weak-solution compatibility conditions checked numerically.
"""

from .errors import (ConfigError, DomainError, HyperwaveError,
                     IntegrationError, RegimeError)
from .surface import SurfaceProfile, capG, capH, capH_curvature, s_one
from .regimes import (RegimeReport, WaveParameters, classify,
                      monodromy_lambda, monodromy_lambda_closed_form,
                      vertical_params)
from .seed import ProfileState, SeedSpec, seed_state, validate_seed
from .odeint import Event, IntegrationConfig, Trajectory, integrate
from .profile import (FULL, REDUCED, ProbeReport, ProfileTrajectory,
                      check_energy_law, check_sigma_identity, energy,
                      profile_rhs, radial_probe, solve_profile)
from .asymptotics import (AsymptoticFit, classify_tail, fit_approach_to_pole,
                          fit_decay_to_center)
from .selfsimilar import (SelfSimilarState, SelfSimilarTrajectory,
                          check_H_invariant, estimate_s_star,
                          interior_star_condition, selfsim_rhs,
                          selfsim_summary, solve_selfsimilar)
from .field import (LOG_SINGULAR, CompatibilityReport, FieldGrid,
                    FieldSampler, GridSpec, boost_probe, compatibility_report,
                    hyperbolic_coords, psi_profile, sample_field,
                    scaling_probe, time_translation_probe)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticFit", "CompatibilityReport", "ConfigError", "DomainError",
    "Event", "FieldGrid", "FieldSampler", "FULL", "GridSpec",
    "HyperwaveError", "IntegrationConfig", "IntegrationError",
    "LOG_SINGULAR", "ProbeReport", "ProfileState", "ProfileTrajectory",
    "REDUCED", "RegimeError", "RegimeReport", "SeedSpec",
    "SelfSimilarState", "SelfSimilarTrajectory", "SurfaceProfile",
    "Trajectory", "WaveParameters", "boost_probe", "capG", "capH",
    "capH_curvature", "check_H_invariant", "check_energy_law",
    "check_sigma_identity", "classify", "classify_tail",
    "compatibility_report", "energy", "estimate_s_star",
    "fit_approach_to_pole", "fit_decay_to_center", "hyperbolic_coords",
    "integrate", "interior_star_condition", "monodromy_lambda",
    "monodromy_lambda_closed_form", "profile_rhs", "psi_profile",
    "radial_probe", "sample_field", "scaling_probe", "seed_state",
    "selfsim_rhs", "selfsim_summary", "solve_profile", "solve_selfsimilar",
    "s_one", "time_translation_probe", "validate_seed", "vertical_params",
]
