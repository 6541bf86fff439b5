import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from lvswitch import _kernels
from lvswitch.env_model import Environment, SwitchRates, jacobian
from lvswitch.errors import EmptyWindow, InputError, NotASaddle
from lvswitch.integrate import solve_planar
from lvswitch.invasion import exponential_stream, standard_exponentials
from lvswitch.pdmp import (
    env_field,
    integrate_flow,
    logistic_flow_closed,
    occupation_fraction,
    occupation_stats,
    simulate_pdmp,
    unstable_manifold,
    unstable_manifold_x_saddle,
)


def test_integrator_matches_solve_ivp(top):
    env = top.env1
    f = env_field(env)
    sol = solve_planar(f, (0.05, 0.4), 6.0, rtol=1e-11, atol=1e-11)
    ref = solve_ivp(lambda t, z: f(*z), (0, 6.0), [0.05, 0.4], method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True)
    assert np.allclose(sol.endpoint, ref.y[:, -1], atol=1e-9)
    tt = np.linspace(0, 6.0, 37)
    assert np.allclose(sol(tt), ref.sol(tt).T, atol=1e-6)


def test_integrator_on_linear_system():
    # z' = A z has the closed form expm(t A) z0
    def f(x, y):
        return -0.5 * x + 2.0 * y, -2.0 * x - 0.5 * y

    sol = solve_planar(f, (1.0, 0.0), 3.0, rtol=1e-12, atol=1e-12, nonnegative=False)
    expected = math.exp(-1.5) * np.array([math.cos(6.0), -math.sin(6.0)])
    assert np.allclose(sol.endpoint, expected, atol=1e-10)


def test_integrator_stop_predicate(top):
    sol = integrate_flow(top.env0, (0.1, 0.1), 1e3, stop=lambda x, y: x > 0.5)
    assert sol.stopped
    assert sol.endpoint[0] > 0.5 and sol.times[-1] < 1e3


@given(
    st.floats(min_value=0.1, max_value=10),
    st.floats(min_value=0.1, max_value=10),
    st.floats(min_value=1e-4, max_value=5),
    st.floats(min_value=0.0, max_value=20),
)
def test_logistic_closed_form(r, k, x0, dt):
    x = logistic_flow_closed(r, k, x0, dt)
    exact = x0 * math.exp(r * dt) / (1 + k * x0 * math.expm1(r * dt)) if r * dt < 700 else 1.0 / k
    assert x == pytest.approx(exact, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("x0, dt", [(0.1, 0.7), (2.0, 3.0), (0.5, 1e-3)])
def test_logistic_integral_closed_form(x0, dt):
    r, k = 1.7, 0.8
    val, _ = quad(lambda s: logistic_flow_closed(r, k, x0, s), 0, dt, epsabs=1e-14)
    assert _kernels.logistic_integral(r, k, x0, dt) == pytest.approx(val, rel=1e-11)


def test_simulation_reproducible(top):
    rates = SwitchRates.from_st(0.4, 10.0)
    a = simulate_pdmp(top, rates, (0.3, 0.3), 0, 50.0, seed=11)
    b = simulate_pdmp(top, rates, (0.3, 0.3), 0, 50.0, seed=11)
    c = simulate_pdmp(top, rates, (0.3, 0.3), 0, 50.0, seed=12)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.times, b.times)
    assert not np.array_equal(a.jump_times, c.jump_times)
    assert a.times[-1] == 50.0


def test_simulation_validates_inputs(top):
    rates = SwitchRates.from_st(0.4, 10.0)
    with pytest.raises(InputError):
        simulate_pdmp(top, rates, (-0.1, 0.3), 0, 5.0)
    with pytest.raises(InputError):
        simulate_pdmp(top, rates, (0.1, 0.3), 2, 5.0)
    with pytest.raises(InputError):
        simulate_pdmp(top, rates, (0.1, 0.3), 0, 0.0)


def test_axis_run_matches_compiled_path(top):
    # on the x axis the simulator uses the same draws as the compiled kernel
    rates = SwitchRates.from_st(0.3, 5.0)
    traj = simulate_pdmp(top, rates, (0.4, 0.0), 0, 200.0, seed=5)
    exps = standard_exponentials(exponential_stream(5, 0), 4096)
    r = np.array([top.env0.alpha, top.env1.alpha])
    k = np.array([top.env0.a, top.env1.a])
    lam = np.array([rates.lambda0, rates.lambda1])
    times, states, envs = _kernels.logistic_pdmp_path(r, k, lam, exps, 0.4, 0, 200.0)
    assert np.array_equal(traj.times, np.array(times))
    assert np.array_equal(traj.states[:, 0], np.array(states))
    assert np.all(traj.states[:, 1] == 0.0)
    assert np.array_equal(traj.env_indices, np.array(envs, dtype=np.int8))


def test_environment_fraction_clt(top):
    # fraction of time in env1 is asymptotically N(s, sigma^2 / T)
    s, t, horizon = 0.3, 4.0, 400.0
    rates = SwitchRates.from_st(s, t)
    sigma2 = 2 * rates.lambda0 * rates.lambda1 / rates.t**3
    z = []
    for seed in range(40):
        traj = simulate_pdmp(top, rates, (0.5, 0.0), 0, horizon, seed=seed)
        stats = occupation_stats(traj, burn_in_fraction=0.0)
        z.append((stats.fraction_env1 - s) / math.sqrt(sigma2 / horizon))
    z = np.array(z)
    assert abs(z.mean()) < 4 / math.sqrt(len(z))
    assert 0.5 < z.std(ddof=1) < 1.6


def test_occupation_statistics(top):
    traj = simulate_pdmp(top, SwitchRates.from_st(0.4, 10.0), (0.3, 0.3), 0, 100.0, seed=2)
    stats = occupation_stats(traj)
    assert stats.window == (10.0, 100.0)
    assert 0 < stats.fraction_env1 < 1
    assert not stats.extinct_x and not stats.extinct_y
    assert occupation_fraction(traj, lambda z: np.ones(len(z), bool)) == pytest.approx(1.0)
    assert occupation_fraction(traj, lambda z: np.zeros(len(z), bool)) == 0.0
    with pytest.raises(InputError):
        occupation_stats(traj, burn_in_fraction=0.95)


def test_extinction_flagged(bottom):
    # s = 0.3, t = 10 lies outside the persistence region of the bottom pair
    traj = simulate_pdmp(bottom, SwitchRates.from_st(0.3, 10.0), (0.2, 0.2), 0, 2000.0, seed=1)
    stats = occupation_stats(traj)
    assert stats.extinct_y and not stats.extinct_x


def test_window_must_be_nonempty(top):
    traj = simulate_pdmp(top, SwitchRates.from_st(0.4, 10.0), (0.3, 0.3), 0, 1.0, seed=2)
    traj.times[-1] = traj.times[0]
    with pytest.raises(EmptyWindow):
        occupation_stats(traj, burn_in_fraction=0.5)


@pytest.mark.parametrize("which", [0, 1])
def test_unstable_manifold_geometry(top, which):
    env = top.envs[which]
    curve = unstable_manifold(env)
    pts = curve.samples
    assert len(pts) >= 512
    assert np.hypot(*(pts[-1] - [1 / env.a, 0])) < 2e-6
    assert np.hypot(*(pts[0] - [0, 1 / env.d])) < 2e-6
    # departure tangent parallel to the unstable eigenvector of the saddle
    vals, vecs = np.linalg.eig(jacobian(env, (0.0, 1 / env.d)))
    e = vecs[:, np.argmax(vals.real)].real
    tangent = np.array(env_field(env)(*pts[0]))
    tangent /= np.linalg.norm(tangent)
    assert abs(tangent[0] * e[1] - tangent[1] * e[0]) < 1e-4
    chord = (pts[1] - pts[0]) / np.linalg.norm(pts[1] - pts[0])
    assert abs(chord[0] * e[1] - chord[1] * e[0]) < 1e-3
    # the closed-form slope is dx/dy of that direction
    assert e[0] / e[1] == pytest.approx(curve.closed_form_slope, rel=1e-10)
    # final approach to the sink has nonpositive slope
    end = pts[-1] - pts[-5]
    assert end[0] > 0 and end[1] / end[0] <= 0
    # samples lie on an orbit: F is tangent to the polyline
    mid = len(pts) // 2
    f = np.array(env_field(env)(*pts[mid]))
    chord = pts[mid + 1] - pts[mid - 1]
    assert abs(f[0] * chord[1] - f[1] * chord[0]) / (np.linalg.norm(f) * np.linalg.norm(chord)) < 1e-3


def test_unstable_manifold_requires_saddle():
    with pytest.raises(NotASaddle):
        unstable_manifold(Environment(2, 2, 1, 1, 1, 1))


def test_unstable_manifold_x_saddle_is_mirror():
    env = Environment(2.0, 2.0, 1.0, 1.0, 1.5, 0.7)
    curve = unstable_manifold_x_saddle(env)
    assert curve.swapped
    assert np.hypot(*(curve.samples[0] - [1 / env.a, 0])) < 2e-6
    assert np.hypot(*(curve.samples[-1] - [0, 1 / env.d])) < 2e-6
