"""Compiled scalar kernels for the one-dimensional logistic PDMP."""
from __future__ import annotations

import math

from numba import njit


@njit(cache=True)
def logistic_flow(r, k, x0, dt):
    # x0 e^{r dt} / (1 + k x0 (e^{r dt} - 1)), written with e^{-r dt} to avoid overflow
    if dt == 0.0 or x0 == 0.0:
        return x0
    decay = math.exp(-r * dt)
    return x0 / (decay + k * x0 * (-math.expm1(-r * dt)))


@njit(cache=True)
def logistic_integral(r, k, x0, dt):
    # integral of the logistic flow over [0, dt]
    if dt == 0.0 or x0 == 0.0:
        return 0.0
    return (r * dt + math.log1p((k * x0 - 1.0) * (-math.expm1(-r * dt)))) / (r * k)


@njit(cache=True)
def logistic_pdmp_average(r, k, g, h, lam, exps, x0, i0, horizon, burn):
    """Time average of ``g_I (1 - h_I X)`` over ``[burn, horizon]``.

    ``exps`` holds standard exponential draws consumed one per holding time.
    Returns ``(average, draws_used, completed)``; ``completed`` is False when
    the draws ran out before the horizon.
    """
    t = 0.0
    x = x0
    i = i0
    n = 0
    acc = 0.0
    while t < horizon:
        if n >= exps.shape[0]:
            return 0.0, n, False
        t_end = t + exps[n] / lam[i]
        n += 1
        if t_end > horizon:
            t_end = horizon
        if t_end <= burn:
            x = logistic_flow(r[i], k[i], x, t_end - t)
        else:
            if t < burn:
                x = logistic_flow(r[i], k[i], x, burn - t)
                t = burn
            dt = t_end - t
            acc += g[i] * dt - g[i] * h[i] * logistic_integral(r[i], k[i], x, dt)
            x = logistic_flow(r[i], k[i], x, dt)
        t = t_end
        i = 1 - i
    return acc / (horizon - burn), n, True


@njit(cache=True)
def logistic_pdmp_path(r, k, lam, exps, x0, i0, horizon):
    """Jump times and states of the logistic PDMP up to ``horizon``.

    Returns arrays ``(times, states, envs)`` sized to the number of intervals
    plus one; ``envs[j]`` is the environment active after ``times[j]``.
    """
    n_max = exps.shape[0]
    times = [0.0]
    states = [x0]
    envs = [i0]
    t = 0.0
    x = x0
    i = i0
    n = 0
    while t < horizon and n < n_max:
        t_end = t + exps[n] / lam[i]
        n += 1
        if t_end > horizon:
            t_end = horizon
        x = logistic_flow(r[i], k[i], x, t_end - t)
        t = t_end
        if t < horizon:
            i = 1 - i
        times.append(t)
        states.append(x)
        envs.append(i)
    return times, states, envs
