"""Adaptive explicit time integration.

Embedded Dormand-Prince 5(4) pair with continuous (dense) output, a PI
step-size controller, and scalar event location. Tolerances enter through
the mixed error norm err_i / (abs_tol + rel_tol * max(|x_i|, |x^_i|)),
where x and x^ are the fifth- and fourth-order candidate solutions; a step
is accepted when the RMS of those ratios is at most one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EPS = np.finfo(np.float64).eps

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# coefficients of the quartic continuous extension (same interpolant as the
# classic dopri5 dense output)
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
_MAX_FACTOR = 5.0
_BETA = 0.04
_ALPHA = 0.2 - 0.75 * _BETA
_MAX_STEPS = 5_000_000


class IntegrationError(RuntimeError):
    """Integration failure; carries the last valid time and state."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class EventNotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class Tolerances:
    abs_tol: float
    rel_tol: float

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {v}")


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    nfev: int = 0


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    stats: StepStats = field(default_factory=StepStats)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.states = np.asarray(self.states, dtype=np.float64)
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")


def _rms_error(err, y_new, y_hat, tol):
    scale = tol.abs_tol + tol.rel_tol * np.maximum(np.abs(y_new), np.abs(y_hat))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _check_finite(k, t):
    if not np.all(np.isfinite(k)):
        raise IntegrationError(f"non-finite right-hand side at t={t!r}", t=t)


def _initial_step(rhs, t0, x0, f0, tol, t_span_len, stats):
    scale = tol.abs_tol + tol.rel_tol * np.abs(x0)
    d0 = np.sqrt(np.mean((x0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_span_len)
    x1 = x0 + h0 * f0
    f1 = rhs(t0 + h0, x1)
    stats.nfev += 1
    _check_finite(f1, t0 + h0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_span_len)


class _Stepper:
    """Adaptive stepping core; exposes one accepted step at a time."""

    def __init__(self, rhs, t0, x0, tol, fixed_step=None):
        self.rhs = rhs
        self.tol = tol
        self.t = float(t0)
        self.x = np.array(x0, dtype=np.float64)
        self.stats = StepStats()
        self.fixed_step = fixed_step
        self.f = rhs(self.t, self.x)
        self.stats.nfev += 1
        _check_finite(self.f, self.t)
        self.h = None
        self.facold = 1e-4
        self.K = np.empty((7, self.x.size))

    def step(self, t_end):
        """Advance one accepted step, capped at t_end. Returns (t_old, h, x_old, K, x_new)."""
        tol = self.tol
        if self.h is None:
            if self.fixed_step is not None:
                self.h = self.fixed_step
            else:
                self.h = _initial_step(self.rhs, self.t, self.x, self.f, tol,
                                       abs(t_end - self.t), self.stats)
        K = self.K
        while True:
            if self.stats.accepted + self.stats.rejected > _MAX_STEPS:
                raise IntegrationError("step budget exhausted", t=self.t, state=self.x)
            remaining = t_end - self.t
            hmin = 1e3 * _EPS * max(abs(self.t), abs(t_end))
            if self.fixed_step is None and self.h < hmin and self.h < remaining:
                raise IntegrationError(
                    f"step size underflow at t={self.t}", t=self.t, state=self.x.copy())
            h = min(self.h, remaining)
            K[0] = self.f
            for s in range(1, 6):
                xs = self.x + h * (K[:s].T @ _A[s])
                K[s] = self.rhs(self.t + _C[s] * h, xs)
                _check_finite(K[s], self.t + _C[s] * h)
            y_new = self.x + h * (K[:6].T @ _A[6])
            K[6] = self.rhs(self.t + h, y_new)
            self.stats.nfev += 6
            _check_finite(K[6], self.t + h)
            if not np.all(np.isfinite(y_new)):
                raise IntegrationError(f"non-finite state at t={self.t + h}", t=self.t + h)
            err_vec = h * (K.T @ _E)
            if self.fixed_step is not None:
                err = 0.0
            else:
                err = _rms_error(err_vec, y_new, y_new - err_vec, tol)
            if err <= 1.0:
                out = (self.t, h, self.x.copy(), K.copy(), y_new)
                self.t = self.t + h
                self.x = y_new
                self.f = K[6].copy()  # FSAL
                self.stats.accepted += 1
                if self.fixed_step is None:
                    if err == 0.0:
                        factor = _MAX_FACTOR
                    else:
                        factor = _SAFETY * err ** (-_ALPHA) * self.facold ** _BETA
                        factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
                    self.facold = max(err, 1e-4)
                    self.h = h * factor
                return out
            self.stats.rejected += 1
            factor = _SAFETY * err ** (-_ALPHA)
            self.h = h * min(1.0, max(_MIN_FACTOR, factor))


def _dense(x_old, h, K, theta):
    """Continuous extension on one step; theta in [0, 1]."""
    p = np.array([theta, theta**2, theta**3, theta**4])
    return x_old + h * (K.T @ (_P @ p))


def integrate(rhs, x0, t_span, tol: Tolerances, output_times=None, fixed_step=None) -> Trajectory:
    """Integrate x' = rhs(t, x) over t_span, sampling at output_times.

    output_times defaults to the accepted step points. With fixed_step the
    error control is bypassed (constant step; used for order checks).
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must satisfy t1 > t0")
    x0 = np.asarray(x0, dtype=np.float64)
    if output_times is not None:
        output_times = np.asarray(output_times, dtype=np.float64)
        if output_times.size and (output_times[0] < t0 - 1e-12 or output_times[-1] > t1 + 1e-12):
            raise ValueError("output_times must lie within t_span")

    stepper = _Stepper(rhs, t0, x0, tol, fixed_step=fixed_step)
    times = []
    states = []
    iout = 0
    if output_times is None:
        times.append(t0)
        states.append(x0.copy())
    else:
        while iout < output_times.size and output_times[iout] <= t0:
            times.append(output_times[iout])
            states.append(x0.copy())
            iout += 1

    while stepper.t < t1:
        t_old, h, x_old, K, x_new = stepper.step(t1)
        t_new = t_old + h
        if output_times is None:
            times.append(t_new)
            states.append(x_new.copy())
        else:
            while iout < output_times.size and output_times[iout] <= t_new + 1e-14 * max(1.0, abs(t_new)):
                tq = output_times[iout]
                if tq >= t_new:
                    states.append(x_new.copy())
                else:
                    theta = (tq - t_old) / h
                    states.append(_dense(x_old, h, K, theta))
                times.append(tq)
                iout += 1
    # times within rounding of t1 that the comparison above just missed
    while output_times is not None and iout < output_times.size:
        times.append(output_times[iout])
        states.append(stepper.x.copy())
        iout += 1
    return Trajectory(np.array(times), np.array(states), stepper.stats)


def integrate_to_event(rhs, x0, t0, event, direction: str, tol: Tolerances,
                       horizon: float, guard=None, samples_per_step: int = 8):
    """Locate the first directional zero crossing of event(x) after t0.

    direction is 'rising' or 'falling'. The crossing must be armed: the
    event has to be observed strictly on the opposite side first, so a zero
    at the initial state does not trigger immediately. guard, when given,
    must hold at the crossing for it to count. Refinement bisects the dense
    output until |event| < 10*abs_tol (or the bracket collapses).
    """
    if direction not in ("rising", "falling"):
        raise ValueError("direction must be 'rising' or 'falling'")
    sgn = 1.0 if direction == "rising" else -1.0
    ev = lambda x: sgn * float(event(x))

    x0 = np.asarray(x0, dtype=np.float64)
    t_end = t0 + horizon
    stepper = _Stepper(rhs, t0, x0, tol)
    armed = ev(x0) < 0.0
    e_prev = ev(x0)
    thetas = np.linspace(0.0, 1.0, samples_per_step + 1)[1:]

    while stepper.t < t_end:
        t_old, h, x_old, K, x_new = stepper.step(t_end)
        for theta in thetas:
            x_th = x_new if theta == 1.0 else _dense(x_old, h, K, theta)
            e_th = ev(x_th)
            if armed and e_prev < 0.0 <= e_th:
                lo, hi = theta - thetas[0], theta
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    x_mid = _dense(x_old, h, K, mid)
                    e_mid = ev(x_mid)
                    if abs(e_mid) < 10.0 * tol.abs_tol:
                        lo = hi = mid
                        break
                    if e_mid < 0.0:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo < 4.0 * _EPS:
                        break
                theta_star = 0.5 * (lo + hi)
                x_star = _dense(x_old, h, K, theta_star)
                if guard is None or guard(x_star):
                    return t_old + theta_star * h, x_star
                # guard rejected this crossing; keep scanning
                armed = False
            if e_th < 0.0:
                armed = True
            e_prev = e_th
    raise EventNotFound(f"no {direction} crossing within horizon {horizon}")
