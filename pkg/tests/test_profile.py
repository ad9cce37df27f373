"""Profile integration, monitors, and the radial obstruction probe."""

import io
import math

import numpy as np
import pytest

from hyperwave.errors import DomainError, IntegrationError
from hyperwave.odeint import IntegrationConfig
from hyperwave.profile import (FULL, REDUCED, ProfileState, check_energy_law,
                               check_sigma_identity, energy, profile_rhs,
                               radial_probe, solve_profile)
from hyperwave.regimes import WaveParameters
from hyperwave.seed import SeedSpec
from hyperwave.surface import SurfaceProfile

SPHERE = SurfaceProfile.sphere()
PSEUDO = SurfaceProfile.pseudosphere()
DECAYING = WaveParameters(mu=-1.0, k=1.0, c=1.0, b=-3.0)
GROWING = WaveParameters(mu=1.0, k=1.0, c=1.0, b=-3.0)
SEED = SeedSpec(q0=0.01)


@pytest.fixture(scope="module")
def reduced_run():
    return solve_profile(SPHERE, DECAYING, SEED, a_max=100.0)


@pytest.fixture(scope="module")
def full_run():
    return solve_profile(SPHERE, GROWING, SEED, a_max=100.0, formulation=FULL)


def test_reduced_run_reaches_target(reduced_run):
    assert reduced_run.reason == "ReachedEnd"
    assert reduced_run.a_begin == pytest.approx(SEED.a_seed, rel=1e-14)
    assert reduced_run.a_end == pytest.approx(100.0, rel=1e-12)


def test_sigma_identity_reduced(reduced_run):
    # the reduced formulation carries the first integral by construction
    assert check_sigma_identity(reduced_run) < 1e-12


def test_sigma_identity_full(full_run):
    # the three-state form must hold the integral to integration accuracy
    assert check_sigma_identity(full_run) < 1.5e-8


def test_energy_law(reduced_run):
    assert check_energy_law(reduced_run) < 1e-8


def test_energy_law_single_interval(reduced_run):
    d = reduced_run.energy_law_defect(1.0, 50.0)
    assert abs(d) < 1e-9


def test_compact_run_stays_inside_pole(full_run):
    a, st = full_run.dense_samples(2)
    assert np.all(st[:, 0] > 0.0)
    assert np.all(st[:, 0] < math.pi)
    assert full_run.min_pole_distance() > 0.01


def test_noncompact_pole_distance_is_infinite():
    run = solve_profile(PSEUDO, DECAYING, SEED, a_max=20.0)
    assert run.min_pole_distance() == math.inf


def test_formulations_agree_on_the_manifold(reduced_run):
    # both state derivatives must coincide where the angular integral holds
    worst = 0.0
    for a in np.geomspace(1e-4, 90.0, 40):
        st = reduced_run.state(float(a))
        r1 = np.array(profile_rhs(SPHERE, DECAYING, st, REDUCED))
        r2 = np.array(profile_rhs(SPHERE, DECAYING, st, FULL))
        worst = max(worst, float(np.max(np.abs(r1 - r2) / (1.0 + np.abs(r1)))))
    assert worst < 1e-12


def test_formulations_split_off_the_manifold(reduced_run):
    # a corrupted sigma must separate the two derivative routes
    st = reduced_run.state(10.0)
    bad = ProfileState(st.a, st.s, st.s_a, st.sigma * 1.01)
    r1 = np.array(profile_rhs(SPHERE, DECAYING, bad, REDUCED))
    r2 = np.array(profile_rhs(SPHERE, DECAYING, bad, FULL))
    assert np.max(np.abs(r1 - r2)) > 1e-8


def test_unknown_formulation_rejected(reduced_run):
    with pytest.raises(DomainError):
        profile_rhs(SPHERE, DECAYING, reduced_run.state(1.0), "banana")
    with pytest.raises(DomainError):
        solve_profile(SPHERE, DECAYING, SEED, a_max=1.0, formulation="banana")


def test_mirror_symmetry_is_exact():
    # q0 -> -q0 flips (s, s_a) with identical step sequences
    plus = solve_profile(SPHERE, DECAYING, SeedSpec(q0=0.01), a_max=50.0)
    minus = solve_profile(SPHERE, DECAYING, SeedSpec(q0=-0.01), a_max=50.0)
    assert np.array_equal(plus.traj.t, minus.traj.t)
    assert np.array_equal(plus.traj.y, -minus.traj.y)


def test_states_shapes_and_slaved_sigma(reduced_run):
    st = reduced_run.states([0.5, 2.0, 40.0])
    assert st.shape == (3, 3)
    one = reduced_run.states(2.0)
    assert one.shape == (3,)
    assert np.array_equal(one, st[1])
    # slaved sigma satisfies a Gamma sigma = -c F exactly
    a, s, sg = 2.0, one[0], one[2]
    assert a * SPHERE.gamma(s) * sg == pytest.approx(-DECAYING.c * SPHERE.capF(s),
                                                     rel=1e-14)


def test_states_reject_nonpositive_radius(reduced_run):
    with pytest.raises(DomainError):
        reduced_run.states(-1.0)
    with pytest.raises(DomainError):
        reduced_run.states(0.0)


def test_dense_samples_start_at_knots(reduced_run):
    a, st = reduced_run.dense_samples(3)
    assert a[0] == pytest.approx(reduced_run.a_begin, rel=1e-14)
    assert a[-1] == pytest.approx(reduced_run.a_end, rel=1e-12)
    # dense mesh contains every accepted knot value
    knots = reduced_run.a
    idx = np.searchsorted(a, knots)
    assert np.allclose(a[np.clip(idx, 0, len(a) - 1)], knots, rtol=1e-12)


def test_energy_at_matches_direct_evaluation(reduced_run):
    st = reduced_run.state(5.0)
    assert reduced_run.energy_at(5.0) == pytest.approx(
        energy(SPHERE, DECAYING, st), rel=1e-13)


def test_csv_roundtrip(reduced_run):
    buf = io.StringIO()
    reduced_run.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "a,s,s_a,sigma,energy"
    assert len(lines) == 1 + len(reduced_run.a)
    rows = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",")
    assert np.array_equal(rows[:, 0], reduced_run.a)
    assert np.array_equal(rows[:, 1], reduced_run.traj.y[:, 0])


def test_growth_without_confinement_raises():
    # mu > 0 on the non-compact target leaves every bounded set
    with pytest.raises(IntegrationError) as exc:
        solve_profile(PSEUDO, GROWING, SEED, a_max=1e4)
    partial = exc.value.trajectory
    assert partial is not None
    assert partial.reason == "BlowUp"
    assert partial.a_end < 1e4


def test_exploratory_keeps_blowup_run():
    run = solve_profile(PSEUDO, GROWING, SEED, a_max=1e4, exploratory=True)
    assert run.reason == "BlowUp"
    assert run.a_end == pytest.approx(6.715042777887967, rel=1e-6)
    assert np.max(np.abs(run.traj.y[:, 0])) > 10.0


def test_a_max_must_exceed_seed_radius():
    with pytest.raises(DomainError):
        solve_profile(SPHERE, DECAYING, SEED, a_max=1e-7)


def test_tolerance_scaling_changes_step_count():
    loose = solve_profile(SPHERE, DECAYING, SEED, a_max=50.0,
                          cfg=IntegrationConfig().scaled(100.0))
    tight = solve_profile(SPHERE, DECAYING, SEED, a_max=50.0)
    assert len(loose.a) < len(tight.a)


def test_radial_probe_spectrum_and_gronwall_floor():
    probe = radial_probe(SPHERE, WaveParameters(mu=-1.0, k=0.0, c=1.0, b=0.0),
                         s_at_one=1e-3)
    assert probe.jacobian_spectrum == (0.0, 0.0, 1.0)
    assert probe.unstable_axis == "a"
    assert probe.min_q_ratio is not None
    assert 0.999 <= probe.min_q_ratio <= 1.0 + 1e-12


def test_radial_probe_without_rotation_skips_gronwall():
    probe = radial_probe(PSEUDO, WaveParameters(mu=1.0, k=0.0, c=0.0, b=0.0))
    assert probe.min_q_ratio is None
    assert probe.unstable_axis == "a"


def test_radial_probe_requires_zero_wavenumber():
    with pytest.raises(DomainError):
        radial_probe(SPHERE, DECAYING)
