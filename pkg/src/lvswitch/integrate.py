"""Adaptive Dormand-Prince 5(4) integration of planar vector fields.

Written for two-dimensional fields given as ``f(x, y) -> (fx, fy)`` on plain
floats, which keeps the per-step overhead small enough for PDMP runs with
tens of thousands of switching intervals.  Dense output between accepted
steps is cubic Hermite interpolation on the stored states and slopes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StepSizeUnderflow

# Dormand & Prince (1980), RK5(4)7M; the 5th order row is propagated (FSAL).
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFETY = 0.9
MIN_FACTOR, MAX_FACTOR = 0.2, 5.0


@dataclass
class FlowSolution:
    times: np.ndarray
    states: np.ndarray
    slopes: np.ndarray
    last_step: float
    stopped: bool = False

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]

    def __call__(self, t):
        """Cubic Hermite interpolation of the solution at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        t0, t1 = self.times[idx], self.times[idx + 1]
        h = t1 - t0
        theta = ((t - t0) / h)[..., None]
        y0, y1 = self.states[idx], self.states[idx + 1]
        f0, f1 = self.slopes[idx] * h[..., None], self.slopes[idx + 1] * h[..., None]
        h00 = (1 + 2 * theta) * (1 - theta) ** 2
        h10 = theta * (1 - theta) ** 2
        h01 = theta**2 * (3 - 2 * theta)
        h11 = theta**2 * (theta - 1)
        return h00 * y0 + h10 * f0 + h01 * y1 + h11 * f1


def initial_step(f, x, y, fx, fy, rtol, atol):
    sx, sy = atol + rtol * abs(x), atol + rtol * abs(y)
    d0 = max(abs(x) / sx, abs(y) / sy)
    d1 = max(abs(fx) / sx, abs(fy) / sy)
    if d0 < 1e-5 or d1 < 1e-5:
        return 1e-6
    return 0.01 * d0 / d1


def solve_planar(f, z0, duration, rtol=1e-9, atol=1e-9, h0=None, stop=None, max_steps=10_000_000, nonnegative=True):
    """Integrate ``z' = f(z)`` from ``z0`` over ``[0, duration]``.

    Returns a :class:`FlowSolution` holding every accepted step.  ``stop`` is
    an optional predicate ``stop(x, y)`` checked after each accepted step; the
    integration ends early when it returns True.  With ``nonnegative`` the
    state is clamped at zero, which only ever removes roundoff because the
    coordinate axes are invariant.
    """
    x, y = float(z0[0]), float(z0[1])
    t = 0.0
    k1x, k1y = f(x, y)
    ts, xs, ys, fxs, fys = [0.0], [x], [y], [k1x], [k1y]
    if duration <= 0.0:
        return _pack(ts, xs, ys, fxs, fys, 0.0, False)
    h = h0 if h0 is not None else initial_step(f, x, y, k1x, k1y, rtol, atol)
    h = min(h, duration)
    steps = 0
    stopped = False
    while t < duration:
        if steps >= max_steps:
            raise StepSizeUnderflow(f"exceeded {max_steps} steps before t={duration}")
        last = t + h >= duration
        if last:
            h = duration - t
        k2x, k2y = f(x + h * A21 * k1x, y + h * A21 * k1y)
        k3x, k3y = f(x + h * (A31 * k1x + A32 * k2x), y + h * (A31 * k1y + A32 * k2y))
        k4x, k4y = f(x + h * (A41 * k1x + A42 * k2x + A43 * k3x), y + h * (A41 * k1y + A42 * k2y + A43 * k3y))
        k5x, k5y = f(
            x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
            y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y),
        )
        k6x, k6y = f(
            x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
            y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
        )
        xn = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
        yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
        k7x, k7y = f(xn, yn)
        ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
        err = max(
            abs(ex) / (atol + rtol * max(abs(x), abs(xn))),
            abs(ey) / (atol + rtol * max(abs(y), abs(yn))),
        )
        steps += 1
        if err <= 1.0:
            t = duration if last else t + h
            if nonnegative and (xn < 0.0 or yn < 0.0):
                xn, yn = max(xn, 0.0), max(yn, 0.0)
                k7x, k7y = f(xn, yn)
            x, y, k1x, k1y = xn, yn, k7x, k7y
            ts.append(t)
            xs.append(x)
            ys.append(y)
            fxs.append(k1x)
            fys.append(k1y)
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err**-0.2))
            if not last:
                h *= factor
            else:
                h = h * factor if factor < 1.0 else h
            if stop is not None and stop(x, y):
                stopped = True
                break
        else:
            h *= max(MIN_FACTOR, SAFETY * err**-0.2)
            if h < 1e-14 * max(1.0, abs(t)):
                raise StepSizeUnderflow(f"step size {h:.3g} underflow at t={t:.6g}")
    return _pack(ts, xs, ys, fxs, fys, h, stopped)


def _pack(ts, xs, ys, fxs, fys, h, stopped):
    return FlowSolution(
        times=np.array(ts),
        states=np.column_stack([xs, ys]),
        slopes=np.column_stack([fxs, fys]),
        last_step=h,
        stopped=stopped,
    )
