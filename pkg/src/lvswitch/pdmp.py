"""Flows, switched-process simulation, occupation statistics and unstable manifolds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .env_model import EnvPair, Environment, SwitchRates, jacobian
from .errors import EmptyWindow, InputError, NonConvergentTrajectory, NotASaddle
from .integrate import FlowSolution, solve_planar
from .invasion import exponential_stream, standard_exponentials

EXTINCTION_THRESHOLD = 1e-6
DEFAULT_TOL = 1e-9


def env_field(env: Environment):
    a, b, c, d, al, be = env.a, env.b, env.c, env.d, env.alpha, env.beta

    def f(x, y):
        return al * x * (1.0 - a * x - b * y), be * y * (1.0 - c * x - d * y)

    return f


def integrate_flow(env: Environment, z0, duration: float, tol: float = DEFAULT_TOL, stop=None) -> FlowSolution:
    if z0[0] < 0 or z0[1] < 0:
        raise InputError(f"initial point {tuple(z0)} is outside the closed quadrant")
    if duration < 0:
        raise InputError("duration must be nonnegative")
    return solve_planar(env_field(env), z0, duration, rtol=tol, atol=tol, stop=stop)


def logistic_flow_closed(r: float, k: float, x0: float, dt: float) -> float:
    """Exact logistic flow ``x' = r x (1 - k x)`` after time ``dt``."""
    return _kernels.logistic_flow(float(r), float(k), float(x0), float(dt))


# ---------------------------------------------------------------------------
# switched process


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    env_indices: np.ndarray  # environment active on [times[n], times[n+1])
    jump_times: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


class _ExpDraws:
    def __init__(self, seed, stream_id, chunk=4096):
        self._rng = exponential_stream(seed, stream_id)
        self._chunk = chunk
        self._buf = standard_exponentials(self._rng, chunk)
        self._pos = 0

    def next(self) -> float:
        if self._pos == len(self._buf):
            self._buf = standard_exponentials(self._rng, self._chunk)
            self._pos = 0
        value = self._buf[self._pos]
        self._pos += 1
        return float(value)


def simulate_pdmp(
    pair: EnvPair,
    rates: SwitchRates,
    z0,
    i0: int,
    horizon: float,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    trajectory_id: int = 0,
) -> Trajectory:
    """Simulate the switched Lotka-Volterra process up to ``horizon``.

    Holding times are exponential with rate ``lambda_i`` in environment ``i``;
    between switches the state follows the flow of the active environment
    (closed-form logistic flow on an axis, adaptive Runge-Kutta otherwise).
    The random stream is determined by ``(seed, trajectory_id)``.
    """
    x, y = float(z0[0]), float(z0[1])
    if x < 0 or y < 0:
        raise InputError("initial point must lie in the closed quadrant")
    if i0 not in (0, 1):
        raise InputError("initial environment must be 0 or 1")
    if not horizon > 0:
        raise InputError("horizon must be positive")
    envs = pair.envs
    fields = [env_field(e) for e in envs]
    lam = (rates.lambda0, rates.lambda1)
    draws = _ExpDraws(seed, trajectory_id)
    times, xs, ys, idx, jumps = [0.0], [x], [y], [i0], []
    t, i = 0.0, i0
    h = None
    while t < horizon:
        t_end = min(t + draws.next() / lam[i], horizon)
        dt = t_end - t
        if y == 0.0 or x == 0.0:
            env = envs[i]
            if y == 0.0:
                x = _kernels.logistic_flow(env.alpha, env.a, x, dt)
            else:
                y = _kernels.logistic_flow(env.beta, env.d, y, dt)
            times.append(t_end)
            xs.append(x)
            ys.append(y)
            idx.append(i)
        else:
            sol = solve_planar(fields[i], (x, y), dt, rtol=tol, atol=tol, h0=h)
            h = sol.last_step
            n = len(sol.times) - 1
            times.extend((t + sol.times[1:-1]).tolist())
            times.append(t_end)
            xs.extend(sol.states[1:, 0].tolist())
            ys.extend(sol.states[1:, 1].tolist())
            idx.extend([i] * n)
            x, y = xs[-1], ys[-1]
        t = t_end
        if t < horizon:
            i = 1 - i
            idx[-1] = i
            jumps.append(t)
    return Trajectory(
        times=np.array(times),
        states=np.column_stack([xs, ys]),
        env_indices=np.array(idx, dtype=np.int8),
        jump_times=np.array(jumps),
        metadata={
            "seed": seed,
            "trajectory_id": trajectory_id,
            "tol": tol,
            "horizon": horizon,
            "lambda0": rates.lambda0,
            "lambda1": rates.lambda1,
            "z0": [float(z0[0]), float(z0[1])],
            "i0": i0,
        },
    )


# ---------------------------------------------------------------------------
# occupation statistics


@dataclass(frozen=True)
class OccupationStats:
    fraction_env1: float
    mean_x: float
    mean_y: float
    min_x: float
    min_y: float
    extinct_x: bool
    extinct_y: bool
    window: tuple
    threshold: float


def _window(traj: Trajectory, burn_in_fraction: float):
    if not 0.0 <= burn_in_fraction <= 0.9:
        raise InputError("burn_in_fraction must lie in [0, 0.9]")
    t = traj.times
    start = t[0] + burn_in_fraction * (t[-1] - t[0])
    k = np.searchsorted(t, start, side="right")
    if k >= len(t):
        raise EmptyWindow("trajectory ends before the burn-in time")
    times = np.concatenate([[start], t[k:]])
    first = traj.states[k - 1] + (traj.states[k] - traj.states[k - 1]) * (start - t[k - 1]) / (t[k] - t[k - 1])
    states = np.vstack([first, traj.states[k:]])
    envs = np.concatenate([[traj.env_indices[k - 1]], traj.env_indices[k:]])
    if len(times) < 2 or times[-1] <= times[0]:
        raise EmptyWindow("post burn-in window is empty")
    return times, states, envs


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    dt = np.diff(times)
    w = np.zeros(len(times))
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w / (times[-1] - times[0])


def occupation_stats(traj: Trajectory, burn_in_fraction: float = 0.1, threshold: float = EXTINCTION_THRESHOLD) -> OccupationStats:
    times, states, envs = _window(traj, burn_in_fraction)
    w = trapezoid_weights(times)
    dt = np.diff(times)
    frac1 = float(np.sum(dt * envs[:-1]) / (times[-1] - times[0]))
    end = traj.states[-1]
    return OccupationStats(
        fraction_env1=frac1,
        mean_x=float(w @ states[:, 0]),
        mean_y=float(w @ states[:, 1]),
        min_x=float(states[:, 0].min()),
        min_y=float(states[:, 1].min()),
        extinct_x=bool(end[0] < threshold),
        extinct_y=bool(end[1] < threshold),
        window=(float(times[0]), float(times[-1])),
        threshold=threshold,
    )


def occupation_fraction(traj: Trajectory, indicator, burn_in_fraction: float = 0.1) -> float:
    """Time fraction after burn-in spent where ``indicator(points)`` is True."""
    times, states, _ = _window(traj, burn_in_fraction)
    inside = np.asarray(indicator(states), dtype=float)
    # weights sum to one up to rounding
    return float(np.clip(trapezoid_weights(times) @ inside, 0.0, 1.0))


# ---------------------------------------------------------------------------
# unstable manifold of the saddle (0, 1/d)


@dataclass
class ManifoldCurve:
    samples: np.ndarray
    env: Environment
    departure_direction: np.ndarray
    closed_form_slope: float  # -(alpha (d - b) + beta d) / (beta c), read as dx/dy
    swapped: bool = False


def _resample_arclength(points: np.ndarray, count: int) -> np.ndarray:
    seg = np.hypot(*np.diff(points, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    keep = np.concatenate([[True], seg > 0])
    s, points = s[keep], points[keep]
    target = np.linspace(0.0, s[-1], count)
    return np.column_stack([np.interp(target, s, points[:, 0]), np.interp(target, s, points[:, 1])])


def unstable_manifold(env: Environment, tol: float = 1e-11, offset: float = 1e-6, min_points: int = 512, time_cap: float = 1e5) -> ManifoldCurve:
    """Trace the branch of the unstable manifold of ``(0, 1/d)`` in the quadrant.

    Requires a Type 1 environment (saddle at ``(0, 1/d)``, sink at ``(1/a, 0)``).
    The curve starts at ``(0, 1/d) + offset/d * e`` with ``e`` the unstable
    eigenvector pointing into the quadrant and stops within ``offset`` of the
    sink.  Samples are resampled uniformly in arclength.
    """
    saddle = np.array([0.0, 1.0 / env.d])
    sink = np.array([1.0 / env.a, 0.0])
    vals, vecs = np.linalg.eig(jacobian(env, saddle))
    vals = vals.real
    k = int(np.argmax(vals))
    if not vals[k] > 0 or not np.min(vals) < 0:
        raise NotASaddle(f"(0, 1/d) is not a saddle of {env}")
    e = vecs[:, k].real
    e = e / np.linalg.norm(e)
    if e[0] < 0:
        e = -e
    start = saddle + offset / env.d * e

    def near_sink(x, y):
        return math.hypot(x - sink[0], y - sink[1]) < offset

    sol = integrate_flow(env, start, time_cap, tol=tol, stop=near_sink)
    if not sol.stopped:
        raise NonConvergentTrajectory(f"manifold did not reach the sink within t={time_cap}")
    # refine each accepted step with Hermite points before resampling
    sub = np.linspace(0.0, 1.0, 9)[:-1]
    tt = (sol.times[:-1, None] + np.diff(sol.times)[:, None] * sub[None, :]).ravel()
    tt = np.concatenate([tt, sol.times[-1:]])
    dense = sol(tt)
    samples = _resample_arclength(dense, max(min_points, len(sol.times)))
    closed_form_slope = -(env.alpha * (env.d - env.b) + env.beta * env.d) / (env.beta * env.c)
    return ManifoldCurve(samples=samples, env=env, departure_direction=e, closed_form_slope=closed_form_slope)


def unstable_manifold_x_saddle(env: Environment, **kwargs) -> ManifoldCurve:
    """Unstable manifold of the saddle ``(1/a, 0)`` of a Type 2 environment."""
    curve = unstable_manifold(env.swap_species(), **kwargs)
    return ManifoldCurve(
        samples=curve.samples[:, ::-1].copy(),
        env=env,
        departure_direction=curve.departure_direction[::-1].copy(),
        closed_form_slope=curve.closed_form_slope,
        swapped=True,
    )
