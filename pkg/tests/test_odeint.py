import math

import numpy as np
import pytest

from hyperwave.errors import DomainError, IntegrationError
from hyperwave.odeint import (BLOWUP, EVENT, REACHED_END, STEP_LIMIT, Event,
                              IntegrationConfig, integrate)


def test_exponential_accuracy():
    traj = integrate(lambda t, y: y, (0.0, 5.0), [1.0])
    assert traj.reason == REACHED_END
    assert traj.y_end[0] == pytest.approx(math.exp(5.0), rel=1e-9)


def test_oscillator_dense_output():
    traj = integrate(lambda t, y: np.array([y[1], -y[0]]), (0.0, 10.0),
                     [1.0, 0.0])
    ts = np.linspace(0.0, 10.0, 197)
    vals = traj(ts)
    assert np.max(np.abs(vals[:, 0] - np.cos(ts))) < 1e-8
    # scalar evaluation matches the batched one exactly
    assert traj(float(ts[53]))[0] == vals[53, 0]


def test_tolerance_refinement_improves_error():
    errs = []
    for scale in (1.0, 1e-2):
        cfg = IntegrationConfig().scaled(scale)
        traj = integrate(lambda t, y: np.array([y[1], -y[0]]), (0.0, 20.0),
                         [0.0, 1.0], cfg)
        errs.append(abs(traj.y_end[0] - math.sin(20.0)))
    assert errs[1] < errs[0]


def test_backward_integration():
    traj = integrate(lambda t, y: y, (0.0, -3.0), [1.0])
    assert traj.y_end[0] == pytest.approx(math.exp(-3.0), rel=1e-9)
    assert traj(-1.5)[0] == pytest.approx(math.exp(-1.5), rel=1e-9)


def test_event_bisection():
    # y = cos t crosses zero at pi/2
    ev = Event("zero", lambda t, y: y[0], direction=-1)
    traj = integrate(lambda t, y: np.array([y[1], -y[0]]), (0.0, 10.0),
                     [1.0, 0.0], events=[ev])
    assert traj.reason == EVENT
    assert traj.event_name == "zero"
    assert traj.t_end == pytest.approx(math.pi / 2, abs=1e-10)


def test_non_terminal_event_records_all_hits():
    ev = Event("zero", lambda t, y: y[0], direction=0, terminal=False)
    traj = integrate(lambda t, y: np.array([y[1], -y[0]]), (0.0, 10.0),
                     [1.0, 0.0], events=[ev])
    assert traj.reason == REACHED_END
    hits = [h.t for h in traj.events]
    expect = [math.pi / 2, 3 * math.pi / 2, 5 * math.pi / 2]
    assert len(hits) == 3
    for h, e in zip(hits, expect):
        assert h == pytest.approx(e, abs=1e-9)


def test_blowup_reported_as_termination():
    cfg = IntegrationConfig(blowup_norm=1e6)
    traj = integrate(lambda t, y: y * y, (0.0, 3.0), [1.0], cfg)
    assert traj.reason == BLOWUP
    assert traj.t_end < 3.0


def test_step_limit():
    cfg = IntegrationConfig(max_steps=10)
    traj = integrate(lambda t, y: y, (0.0, 50.0), [1.0], cfg)
    assert traj.reason == STEP_LIMIT


def test_nonfinite_rhs_raises_with_partial_trajectory():
    def rhs(t, y):
        return np.array([1.0 / (1.0 - t)])
    with pytest.raises(IntegrationError) as exc:
        integrate(rhs, (0.0, 2.0), [0.0])
    assert exc.value.trajectory is not None
    assert exc.value.trajectory.t_end <= 1.0


def test_dense_output_outside_interval_raises():
    traj = integrate(lambda t, y: y, (0.0, 1.0), [1.0])
    with pytest.raises(DomainError):
        traj(2.0)
    with pytest.raises(DomainError):
        traj(-0.5)


def test_determinism_bitwise():
    runs = [integrate(lambda t, y: np.array([y[1], -y[0] - 0.1 * y[1]]),
                      (0.0, 30.0), [1.0, 0.0]) for _ in range(2)]
    assert np.array_equal(runs[0].t, runs[1].t)
    assert np.array_equal(runs[0].y, runs[1].y)


def test_max_step_is_respected():
    cfg = IntegrationConfig(max_step=0.01)
    traj = integrate(lambda t, y: y, (0.0, 1.0), [1.0], cfg)
    assert np.max(np.diff(traj.t)) <= 0.01 + 1e-15


def test_knot_values_match_dense_output():
    traj = integrate(lambda t, y: np.array([y[1], -y[0]]), (0.0, 10.0),
                     [1.0, 0.0])
    mid = traj.t[:-1] + 0.5 * np.diff(traj.t)
    vals = traj(mid)
    circle = vals[:, 0] ** 2 + vals[:, 1] ** 2
    assert np.max(np.abs(circle - 1.0)) < 1e-9
