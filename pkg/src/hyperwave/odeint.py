"""Adaptive Runge-Kutta integration with dense output and event location.

The stepper is the Dormand-Prince 5(4) embedded pair: the fifth-order
solution propagates, the fourth-order difference drives the step size
through the usual 0.9 * err^(-1/5) controller clipped to [0.2, 10].  Each
accepted step stores the free quartic interpolant, so trajectories can be
evaluated anywhere inside the covered interval at interpolation order
matching the local error.

Events are scalar functions of (t, y) watched for sign changes across
accepted steps and refined by bisection on the dense output to 1e-12 in t.
A terminal event ends the run at the located time.  Termination is always
one of ReachedEnd / Event / BlowUp / StepLimit; a non-finite right-hand
side raises IntegrationError carrying the partial trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, IntegrationError

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([], dtype=float),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# fifth-order minus fourth-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])
# free interpolant: y(t0 + th*h) = y0 + h * K^T P [th, th^2, th^3, th^4]
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_EVENT_TTOL = 1e-12

REACHED_END = "ReachedEnd"
EVENT = "Event"
BLOWUP = "BlowUp"
STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class IntegrationConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    blowup_norm: float = 1e8
    max_steps: int = 10_000_000

    def scaled(self, factor: float) -> "IntegrationConfig":
        """Config with rtol and atol multiplied by `factor`."""
        return replace(self, rtol=self.rtol * factor, atol=self.atol * factor)


@dataclass(frozen=True)
class Event:
    """Scalar event g(t, y); a sign change of g marks an occurrence.

    direction > 0 reacts only to g growing through zero, < 0 only to g
    falling through zero, 0 to both.  Terminal events stop the run.
    """

    name: str
    fn: Callable
    direction: int = 0
    terminal: bool = True


@dataclass
class EventHit:
    name: str
    t: float
    y: np.ndarray


class Trajectory:
    """Piecewise-quartic solution record of one integration run."""

    def __init__(self, t, y, dense, reason, event_name=None, events=None,
                 nfev=0, n_accepted=0, n_rejected=0):
        self.t = np.asarray(t, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self._dense = dense  # list of (t0, h_signed, y0, Q[d,4]) per step
        self.reason = reason
        self.event_name = event_name
        self.events = events or []
        self.nfev = nfev
        self.n_accepted = n_accepted
        self.n_rejected = n_rejected
        self._dir = 1.0 if (len(self.t) < 2 or self.t[-1] >= self.t[0]) else -1.0

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.y[-1]

    def __call__(self, t):
        """Evaluate the dense output; t scalar -> (d,), t array -> (n, d)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.t[0] * self._dir, self.t[-1] * self._dir
        tt = t_arr * self._dir
        slack = 1e-9 * max(1.0, abs(lo), abs(hi))
        if np.any(tt < lo - slack) or np.any(tt > hi + slack):
            raise DomainError("dense evaluation outside the integrated interval")
        if not self._dense:
            out = np.repeat(self.y[:1], len(t_arr), axis=0)
        else:
            knots = self.t[:-1] * self._dir
            idx = np.clip(np.searchsorted(knots, tt, side="right") - 1,
                          0, len(self._dense) - 1)
            out = np.empty((len(t_arr), self.y.shape[1]))
            for j in range(len(t_arr)):
                t0, h, y0, q = self._dense[idx[j]]
                th = (t_arr[j] - t0) / h
                out[j] = y0 + q @ (th ** np.arange(1, 5))
        return out[0] if np.ndim(t) == 0 else out


def _rms_norm(x) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(rhs, t0, y0, f0, direction, rtol, atol, max_step):
    scale = atol + rtol * np.abs(y0)
    d0 = _rms_norm(y0 / scale)
    d1 = _rms_norm(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = np.asarray(rhs(t0 + h0 * direction, y1), dtype=float)
    d2 = _rms_norm((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def _eval_segment(segment, t):
    t0, h, y0, q = segment
    th = (t - t0) / h
    return y0 + q @ (th ** np.arange(1, 5))


def _locate_event(ev, g_lo, t_lo, t_hi, segment):
    """Bisect the dense segment for the zero of ev.fn; 1e-12 tolerance in t."""
    a, b = t_lo, t_hi
    ga = g_lo
    for _ in range(200):
        if abs(b - a) <= _EVENT_TTOL:
            break
        m = 0.5 * (a + b)
        gm = ev.fn(m, _eval_segment(segment, m))
        if gm == 0.0:
            a = b = m
            break
        if (ga < 0) != (gm < 0):
            b = m
        else:
            a, ga = m, gm
    te = 0.5 * (a + b)
    return te, _eval_segment(segment, te)


def integrate(rhs, t_span, y0, cfg: IntegrationConfig | None = None,
              events: Sequence[Event] = ()) -> Trajectory:
    """Integrate y' = rhs(t, y) over t_span = (t0, t1) with adaptive steps.

    Deterministic: identical inputs produce bitwise-identical trajectories.
    Raises IntegrationError (with the partial trajectory attached) on a
    non-finite right-hand side or step-size underflow; blow-up past
    cfg.blowup_norm and exceeding cfg.max_steps are reported as regular
    terminations, not errors.
    """
    cfg = cfg or IntegrationConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.array(y0, dtype=float).copy()
    if y.ndim != 1:
        raise DomainError("state must be one-dimensional")
    if not np.all(np.isfinite(y)):
        raise DomainError("initial state must be finite")

    ts = [t0]
    ys = [y.copy()]
    dense = []
    hits: list[EventHit] = []
    nfev = 0
    n_rejected = 0

    def partial(reason, event_name=None):
        return Trajectory(np.array(ts), np.array(ys), dense, reason,
                          event_name=event_name, events=hits, nfev=nfev,
                          n_accepted=len(dense), n_rejected=n_rejected)

    if t1 == t0:
        return partial(REACHED_END)

    direction = 1.0 if t1 > t0 else -1.0
    f = np.asarray(rhs(t0, y), dtype=float)
    nfev = 1
    if not np.all(np.isfinite(f)):
        raise IntegrationError("non-finite right-hand side at the initial state",
                               partial(REACHED_END))
    h = _initial_step(rhs, t0, y, f, direction, cfg.rtol, cfg.atol, cfg.max_step)
    nfev += 1
    h = min(h, abs(t1 - t0))

    g_prev = [ev.fn(t0, y) for ev in events]
    t = t0
    K = np.empty((7, y.size))

    while True:
        if len(dense) >= cfg.max_steps:
            return partial(STEP_LIMIT)
        h = min(h, cfg.max_step, abs(t1 - t))
        if h < _EVENT_TTOL * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", partial(REACHED_END))

        K[0] = f
        bad = False
        for i in range(1, 7):
            dy = (K[:i].T @ _A[i]) * (h * direction)
            K[i] = rhs(t + _C[i] * h * direction, y + dy)
            nfev += 1
            if not np.all(np.isfinite(K[i])):
                bad = True
                break
        if bad:
            raise IntegrationError(
                f"non-finite right-hand side near t = {t + h * direction:.17g}",
                partial(REACHED_END))
        y_new = y + (K.T @ _B) * (h * direction)
        err = (K.T @ _E) * (h * direction)
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = _rms_norm(err / scale)

        if err_norm > 1.0:
            n_rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2)
            continue

        t_new = t + h * direction
        q = (K.T @ _P) * (h * direction)
        segment = (t, h * direction, y.copy(), q)
        dense.append(segment)

        # event handling on the accepted segment
        stop_at = None
        stop_ev = None
        for j, ev in enumerate(events):
            g_new = ev.fn(t_new, y_new)
            g_old = g_prev[j]
            crossed = (g_old < 0 < g_new and ev.direction >= 0) or \
                      (g_old > 0 > g_new and ev.direction <= 0) or \
                      (g_old != 0 and g_new == 0.0)
            g_prev[j] = g_new
            if not crossed:
                continue
            te, ye = _locate_event(ev, g_old, t, t_new, segment)
            hits.append(EventHit(ev.name, te, ye))
            if ev.terminal and (stop_at is None or (te - stop_at) * direction < 0):
                stop_at, stop_ev = te, ev

        if stop_at is not None:
            hits[:] = [e for e in hits if (e.t - stop_at) * direction <= 0.0]
            y_stop = _eval_segment(segment, stop_at)
            # rescale interpolant columns so theta spans [0, 1] on the clip
            hclip = stop_at - t
            ratio = hclip / (h * direction)
            qc = q * ratio ** np.arange(1, 5)
            dense[-1] = (t, hclip if hclip != 0.0 else h * direction * 1e-300, y.copy(), qc)
            ts.append(stop_at)
            ys.append(y_stop)
            return partial(EVENT, event_name=stop_ev.name)

        ts.append(t_new)
        ys.append(y_new.copy())
        t, y = t_new, y_new
        f = K[6].copy()  # FSAL

        if np.max(np.abs(y)) > cfg.blowup_norm:
            return partial(BLOWUP)
        if (t1 - t) * direction <= 0.0:
            return partial(REACHED_END)

        factor = _MAX_FACTOR if err_norm == 0.0 else min(_MAX_FACTOR, _SAFETY * err_norm ** -0.2)
        h *= factor
