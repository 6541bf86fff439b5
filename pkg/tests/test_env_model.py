import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lvswitch.env_model import (
    Environment,
    PortraitTag,
    SwitchRates,
    classify,
    interior_equilibrium,
    intervals,
    jacobian,
    mix,
    quadratic_roots,
    s_to_u,
    st_to_uv,
    u_to_s,
    uv_to_st,
    validate_pair,
    vector_field,
)
from lvswitch.errors import DegenerateEnvironment, InputError, NotFavorableToX
from lvswitch.presets import bottom_pair, top_pair

positive = st.floats(min_value=0.05, max_value=20.0, allow_nan=False)
unit = st.floats(min_value=1e-3, max_value=1 - 1e-3)


@st.composite
def favorable_env(draw):
    a, b = draw(positive), draw(positive)
    c = a + draw(st.floats(min_value=0.01, max_value=10.0))
    d = b + draw(st.floats(min_value=0.01, max_value=10.0))
    return Environment(a, b, c, d, draw(positive), draw(positive))


@st.composite
def favorable_pair(draw):
    return validate_pair(draw(favorable_env()), draw(favorable_env()))


def scan_interval(values, grid):
    """Endpoints of the positive set of sampled values, or None."""
    pos = np.flatnonzero(values > 0)
    if pos.size == 0:
        return None
    return grid[pos[0]], grid[pos[-1]]


def test_environment_rejects_nonpositive():
    with pytest.raises(InputError, match="'c'"):
        Environment(1, 1, -2, 2, 1, 1)
    with pytest.raises(InputError):
        Environment(1, 1, 2, math.inf, 1, 1)


def test_validate_pair_names_standing_assumption():
    good = Environment(1, 1, 2, 2, 1, 1)
    with pytest.raises(NotFavorableToX, match="a < c"):
        validate_pair(Environment(3, 1, 2, 2, 1, 1), good)
    with pytest.raises(NotFavorableToX, match="b < d"):
        validate_pair(good, Environment(1, 3, 2, 2, 1, 1))


def test_validate_pair_relabels():
    e_hi = Environment(3, 3, 4, 5.5, 5, 1)
    e_lo = Environment(1, 1, 2, 2, 1, 5)
    pair = validate_pair(e_hi, e_lo)
    assert pair.canonical_order_swapped
    assert pair.env0 == e_lo and pair.env1 == e_hi
    assert not validate_pair(e_lo, e_hi).canonical_order_swapped


def test_top_pair_quadratics_and_intervals(top):
    ci = intervals(top)
    assert ci.quad_I == pytest.approx((-5.0, 32.0, -32.0))
    assert ci.quad_J == pytest.approx((-5.0, 30.5, -38.0))
    assert ci.I == pytest.approx(((32 - math.sqrt(384)) / 64, (32 + math.sqrt(384)) / 64), rel=1e-14)
    assert ci.J == pytest.approx(((30.5 - math.sqrt(170.25)) / 76, (30.5 + math.sqrt(170.25)) / 76), rel=1e-14)
    assert top.configuration() == "nested"


def test_bottom_pairs_intersection():
    assert intervals(bottom_pair(6.8)).I_and_J is None
    ci = intervals(bottom_pair(6.2))
    lo, hi = ci.I_and_J
    assert (lo, hi) != ci.I and (lo, hi) != ci.J


def test_identical_pair_has_empty_intervals(identical):
    ci = intervals(identical)
    assert ci.I is None and ci.J is None


@pytest.mark.parametrize("pair", [top_pair(5.5), bottom_pair(6.2), bottom_pair(6.8)])
def test_intervals_match_sign_scan(pair):
    grid = np.linspace(0.0, 1.0, 10001)
    envs = [mix(pair, s) for s in grid]
    ci = intervals(pair)
    for iv, gap in ((ci.I, [e.a - e.c for e in envs]), (ci.J, [e.b - e.d for e in envs])):
        scan = scan_interval(np.array(gap), grid)
        assert (iv is None) == (scan is None)
        if iv is not None:
            assert iv == pytest.approx(scan, abs=1e-4)


@given(favorable_pair())
def test_intervals_agree_with_mixed_environment(pair):
    ci = intervals(pair)
    for iv, gap in ((ci.I, lambda e: e.a - e.c), (ci.J, lambda e: e.b - e.d)):
        if iv is None:
            continue
        lo, hi = iv
        mid = 0.5 * (lo + hi)
        if hi - lo > 1e-6:
            assert gap(mix(pair, mid)) > 0


@given(favorable_pair(), unit, st.floats(min_value=1e-3, max_value=1e4))
def test_st_uv_round_trip(pair, s, t):
    u, v = st_to_uv(pair, s, t)
    s2, t2 = uv_to_st(pair, u, v)
    assert s2 == pytest.approx(s, rel=1e-12)
    assert t2 == pytest.approx(t, rel=1e-12)
    assert u_to_s(pair, s_to_u(pair, s)) == pytest.approx(s, rel=1e-12)
    rates = SwitchRates.from_st(s, t)
    assert rates.uv(pair) == pytest.approx((u, v), rel=1e-12)
    assert SwitchRates.from_uv(pair, u, v).s == pytest.approx(s, rel=1e-12)


@given(favorable_pair(), unit)
def test_mix_field_is_convex_combination(pair, s):
    z = np.array([0.37, 0.21])
    expected = (1 - s) * vector_field(pair.env0, z) + s * vector_field(pair.env1, z)
    assert np.allclose(vector_field(mix(pair, s), z), expected, rtol=1e-12, atol=1e-14)


def test_mix_exact_at_endpoints(top):
    assert mix(top, 0.0) == top.env0
    assert mix(top, 1.0) == top.env1
    with pytest.raises(InputError):
        mix(top, 1.5)


def test_quadratic_roots_stable():
    # roots 1e-9 and 1: naive formula loses the small root
    roots = quadratic_roots((1e-9, -(1 + 1e-9), 1.0))
    assert roots[0] == pytest.approx(1e-9, rel=1e-12)
    assert roots[1] == pytest.approx(1.0, rel=1e-12)
    assert quadratic_roots((1.0, 0.0, 1.0)) == ()


@pytest.mark.parametrize(
    "env, tag",
    [
        (Environment(1, 1, 2, 2, 1, 1), PortraitTag.TYPE1_EXTINCT_Y),
        (Environment(2, 2, 1, 1, 1, 1), PortraitTag.TYPE2_EXTINCT_X),
        (Environment(2, 1, 1, 2, 1, 1), PortraitTag.TYPE3_COEXIST),
        (Environment(1, 2, 2, 1, 1, 1), PortraitTag.TYPE4_BISTABLE),
    ],
)
def test_classify_types(env, tag):
    pt = classify(env)
    assert pt.tag == tag
    natures = dict(pt.equilibria)
    if tag == PortraitTag.TYPE3_COEXIST:
        assert pt.interior[1] == "sink"
    if tag == PortraitTag.TYPE4_BISTABLE:
        assert pt.interior[1] == "saddle"
    if tag == PortraitTag.TYPE1_EXTINCT_Y:
        assert natures[(1.0, 0.0)] == "sink" and natures[(0.0, 1.0 / env.d)] == "saddle"


def test_classify_degenerate():
    with pytest.raises(DegenerateEnvironment):
        classify(Environment(1, 1, 1, 2, 1, 1))


@given(favorable_env())
def test_interior_equilibrium_solves_isoclines(env):
    det = env.a * env.d - env.b * env.c
    z = interior_equilibrium(env)
    if det == 0.0:
        assert z is None
        return
    assume(abs(det) > 1e-6 * env.a * env.d)
    assert env.a * z[0] + env.b * z[1] == pytest.approx(1.0, abs=1e-9 * (1 + abs(z).max()))
    assert env.c * z[0] + env.d * z[1] == pytest.approx(1.0, abs=1e-9 * (1 + abs(z).max()))


def test_averaged_environment_types_follow_intervals(top):
    ci = intervals(top)
    s_in_I_not_J = 0.5 * (ci.J[1] + ci.I[1])
    assert classify(mix(top, s_in_I_not_J)).tag == PortraitTag.TYPE3_COEXIST
    s_in_both = 0.5 * (ci.J[0] + ci.J[1])
    assert classify(mix(top, s_in_both)).tag == PortraitTag.TYPE2_EXTINCT_X
    assert classify(mix(top, 0.05)).tag == PortraitTag.TYPE1_EXTINCT_Y


def test_jacobian_matches_finite_difference(top):
    env = top.env1
    z = np.array([0.2, 0.1])
    h = 1e-6
    fd = np.column_stack(
        [(vector_field(env, z + h * e) - vector_field(env, z - h * e)) / (2 * h) for e in np.eye(2)]
    )
    assert np.allclose(jacobian(env, z), fd, atol=1e-8)


def test_switch_rates_validation():
    with pytest.raises(InputError):
        SwitchRates.from_st(0.0, 1.0)
    with pytest.raises(InputError):
        SwitchRates.from_st(0.5, -1.0)
    r = SwitchRates.from_st(0.25, 8.0)
    assert (r.lambda0, r.lambda1) == (2.0, 6.0)
    assert r.swapped().s == pytest.approx(0.75)
