"""Lotka-Volterra environments, averaged environments and critical intervals.

An environment ``(a, b, c, d, alpha, beta)`` defines the competitive system

    x' = alpha * x * (1 - a x - b y)
    y' = beta  * y * (1 - c x - d y)

Two environments are switched by a two-state Markov chain with rates
``lambda0`` (leaving 0) and ``lambda1`` (leaving 1).  The rates are also
described by ``(s, t) = (lambda0 / (lambda0 + lambda1), lambda0 + lambda1)``
and by ``(u, v) = (gamma0 / (gamma0 + gamma1), gamma0 + gamma1)`` with
``gamma_i = lambda_i / alpha_i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DegenerateEnvironment, InputError, NotFavorableToX

Interval = Optional[tuple]


@dataclass(frozen=True)
class Environment:
    a: float
    b: float
    c: float
    d: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "alpha", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InputError(f"environment field {name!r} must be positive and finite, got {value!r}")

    @property
    def favorable_to_x(self) -> bool:
        return self.a < self.c and self.b < self.d

    def swap_species(self) -> "Environment":
        """Environment seen with the roles of x and y exchanged."""
        return Environment(a=self.d, b=self.c, c=self.b, d=self.a, alpha=self.beta, beta=self.alpha)

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class EnvPair:
    env0: Environment
    env1: Environment
    canonical_order_swapped: bool = False

    @property
    def envs(self) -> tuple:
        return (self.env0, self.env1)

    def configuration(self) -> str:
        """Name the ordering of the coefficients.

        ``"nested"``        a0 < c0 < a1 < c1 and b0 < d0 < b1 < d1
        ``"I_empty"``       c0 >= a1, so the interval I is empty
        ``"reversed_bd"``   b1 < d1 < b0 < d0 (I and J cannot intersect)
        ``"J_empty"``       neither d1 < b0 nor d0 < b1, so J is empty
        ``"other"``         any remaining ordering
        """
        e0, e1 = self.env0, self.env1
        if e0.c >= e1.a:
            return "I_empty"
        if e0.b < e0.d < e1.b < e1.d:
            return "nested"
        if e1.b < e1.d < e0.b < e0.d:
            return "reversed_bd"
        if not (e1.d < e0.b or e0.d < e1.b):
            return "J_empty"
        return "other"


@dataclass(frozen=True)
class SwitchRates:
    lambda0: float
    lambda1: float

    def __post_init__(self):
        for name in ("lambda0", "lambda1"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InputError(f"{name} must be positive and finite, got {value!r}")

    @classmethod
    def from_st(cls, s: float, t: float) -> "SwitchRates":
        if not 0.0 < s < 1.0:
            raise InputError(f"s must lie in (0, 1), got {s!r}")
        if not t > 0:
            raise InputError(f"t must be positive, got {t!r}")
        return cls(s * t, (1.0 - s) * t)

    @classmethod
    def from_uv(cls, pair: EnvPair, u: float, v: float) -> "SwitchRates":
        if not 0.0 < u < 1.0:
            raise InputError(f"u must lie in (0, 1), got {u!r}")
        if not v > 0:
            raise InputError(f"v must be positive, got {v!r}")
        return cls(pair.env0.alpha * u * v, pair.env1.alpha * (1.0 - u) * v)

    @property
    def s(self) -> float:
        return self.lambda0 / (self.lambda0 + self.lambda1)

    @property
    def t(self) -> float:
        return self.lambda0 + self.lambda1

    def gammas(self, r0: float, r1: float) -> tuple:
        return self.lambda0 / r0, self.lambda1 / r1

    def uv(self, pair: EnvPair) -> tuple:
        g0, g1 = self.gammas(pair.env0.alpha, pair.env1.alpha)
        return g0 / (g0 + g1), g0 + g1

    def swapped(self) -> "SwitchRates":
        return SwitchRates(self.lambda1, self.lambda0)


class PortraitTag(str, Enum):
    TYPE1_EXTINCT_Y = "Type1_ExtinctY"
    TYPE2_EXTINCT_X = "Type2_ExtinctX"
    TYPE3_COEXIST = "Type3_Coexist"
    TYPE4_BISTABLE = "Type4_Bistable"


@dataclass(frozen=True)
class PortraitType:
    tag: PortraitTag
    equilibria: tuple  # ((x, y), nature) pairs

    @property
    def interior(self):
        for point, nature in self.equilibria:
            if point[0] > 0 and point[1] > 0:
                return point, nature
        return None


@dataclass(frozen=True)
class CriticalIntervals:
    quad_I: tuple  # (c0, c1, c2) of N(s) = c0 + c1 s + c2 s^2
    quad_J: tuple
    I: Interval
    J: Interval
    I_tilde: Interval
    J_tilde: Interval

    @property
    def I_and_J(self) -> Interval:
        return intersect(self.I, self.J)


def intersect(first: Interval, second: Interval) -> Interval:
    if first is None or second is None:
        return None
    lo, hi = max(first[0], second[0]), min(first[1], second[1])
    return (lo, hi) if lo < hi else None


def in_interval(s, interval: Interval) -> bool:
    return interval is not None and interval[0] < s < interval[1]


# ---------------------------------------------------------------------------
# vector field


def vector_field(env: Environment, z) -> np.ndarray:
    x, y = z
    return np.array([env.alpha * x * (1.0 - env.a * x - env.b * y), env.beta * y * (1.0 - env.c * x - env.d * y)])


def jacobian(env: Environment, z) -> np.ndarray:
    x, y = z
    a, b, c, d, al, be = env.a, env.b, env.c, env.d, env.alpha, env.beta
    return np.array(
        [
            [al * (1.0 - 2.0 * a * x - b * y), -al * b * x],
            [-be * c * y, be * (1.0 - c * x - 2.0 * d * y)],
        ]
    )


def mix(pair: EnvPair, s: float) -> Environment:
    """Averaged environment whose field is ``(1 - s) F0 + s F1``."""
    if not 0.0 <= s <= 1.0:
        raise InputError(f"s must lie in [0, 1], got {s!r}")
    if s == 0.0:
        return pair.env0
    if s == 1.0:
        return pair.env1
    e0, e1 = pair.env0, pair.env1
    alpha = (1 - s) * e0.alpha + s * e1.alpha
    beta = (1 - s) * e0.beta + s * e1.beta
    return Environment(
        a=((1 - s) * e0.alpha * e0.a + s * e1.alpha * e1.a) / alpha,
        b=((1 - s) * e0.alpha * e0.b + s * e1.alpha * e1.b) / alpha,
        c=((1 - s) * e0.beta * e0.c + s * e1.beta * e1.c) / beta,
        d=((1 - s) * e0.beta * e0.d + s * e1.beta * e1.d) / beta,
        alpha=alpha,
        beta=beta,
    )


def interior_equilibrium(env: Environment):
    """Intersection of the isoclines ``ax + by = 1`` and ``cx + dy = 1``, or None."""
    det = env.a * env.d - env.b * env.c
    if det == 0.0:
        return None
    return np.array([(env.d - env.b) / det, (env.a - env.c) / det])


def _nature(jac: np.ndarray) -> str:
    eig = np.linalg.eigvals(jac).real
    if np.all(eig > 0):
        return "source"
    if np.all(eig < 0):
        return "sink"
    return "saddle"


def classify(env: Environment) -> PortraitType:
    """Phase-portrait type of a single environment.

    Ties ``a == c`` or ``b == d`` are limit cases and raise
    :class:`DegenerateEnvironment`.
    """
    if env.a == env.c or env.b == env.d:
        raise DegenerateEnvironment(f"a == c or b == d in {env}")
    x_axis = np.array([1.0 / env.a, 0.0])
    y_axis = np.array([0.0, 1.0 / env.d])
    a_lt_c, b_lt_d = env.a < env.c, env.b < env.d
    if a_lt_c and b_lt_d:
        tag = PortraitTag.TYPE1_EXTINCT_Y
    elif not a_lt_c and not b_lt_d:
        tag = PortraitTag.TYPE2_EXTINCT_X
    elif not a_lt_c and b_lt_d:
        tag = PortraitTag.TYPE3_COEXIST
    else:
        tag = PortraitTag.TYPE4_BISTABLE
    points = [np.zeros(2), x_axis, y_axis]
    if tag in (PortraitTag.TYPE3_COEXIST, PortraitTag.TYPE4_BISTABLE):
        points.append(interior_equilibrium(env))
    equilibria = tuple((tuple(float(v) for v in p), _nature(jacobian(env, p))) for p in points)
    return PortraitType(tag=tag, equilibria=equilibria)


# ---------------------------------------------------------------------------
# critical intervals


def _quadratic_coefficients(r0, r1, k0, k1, g0, g1, h0, h1) -> tuple:
    # N(s) = [(1-s) r0 k0 + s r1 k1] g_s - [(1-s) g0 h0 + s g1 h1] r_s
    pk0, dpk = r0 * k0, r1 * k1 - r0 * k0
    gh0, dgh = g0 * h0, g1 * h1 - g0 * h0
    dr, dg = r1 - r0, g1 - g0
    c0 = pk0 * g0 - gh0 * r0
    c1 = pk0 * dg + dpk * g0 - gh0 * dr - dgh * r0
    c2 = dpk * dg - dgh * dr
    return (c0, c1, c2)


def quadratic_roots(coeffs) -> tuple:
    """Real roots of ``c0 + c1 s + c2 s^2`` in increasing order, cancellation-free."""
    c0, c1, c2 = coeffs
    if c2 == 0.0:
        return () if c1 == 0.0 else (-c0 / c1,)
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        return ()
    q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1))
    if q == 0.0:
        return (0.0, 0.0)
    r1, r2 = q / c2, c0 / q
    return tuple(sorted((r1, r2)))


def positive_set(coeffs) -> Interval:
    """Open subinterval of (0, 1) where the quadratic is positive.

    Assumes the quadratic is negative at 0 and at 1, so the positive set in
    [0, 1] is empty or a single open interval between two roots.
    """
    roots = quadratic_roots(coeffs)
    if len(roots) < 2 or coeffs[2] >= 0.0:
        return None
    lo, hi = max(roots[0], 0.0), min(roots[1], 1.0)
    return (lo, hi) if lo < hi else None


def s_to_u(pair: EnvPair, s):
    a0, a1 = pair.env0.alpha, pair.env1.alpha
    return s * a1 / ((1 - s) * a0 + s * a1)


def u_to_s(pair: EnvPair, u):
    a0, a1 = pair.env0.alpha, pair.env1.alpha
    return u * a0 / (u * a0 + (1 - u) * a1)


def _map_interval(pair, interval):
    if interval is None:
        return None
    return (float(s_to_u(pair, interval[0])), float(s_to_u(pair, interval[1])))


def intervals(pair: EnvPair) -> CriticalIntervals:
    """Critical intervals ``I = {a_s > c_s}`` and ``J = {b_s > d_s}`` in s."""
    e0, e1 = pair.env0, pair.env1
    quad_I = _quadratic_coefficients(e0.alpha, e1.alpha, e0.a, e1.a, e0.beta, e1.beta, e0.c, e1.c)
    quad_J = _quadratic_coefficients(e0.alpha, e1.alpha, e0.b, e1.b, e0.beta, e1.beta, e0.d, e1.d)
    I, J = positive_set(quad_I), positive_set(quad_J)
    return CriticalIntervals(
        quad_I=quad_I, quad_J=quad_J, I=I, J=J, I_tilde=_map_interval(pair, I), J_tilde=_map_interval(pair, J)
    )


def st_to_uv(pair: EnvPair, s: float, t: float) -> tuple:
    a0, a1 = pair.env0.alpha, pair.env1.alpha
    w = (1 - s) * a0 + s * a1
    return s * a1 / w, t * w / (a0 * a1)


def uv_to_st(pair: EnvPair, u: float, v: float) -> tuple:
    a0, a1 = pair.env0.alpha, pair.env1.alpha
    lam0, lam1 = a0 * u * v, a1 * (1 - u) * v
    t = lam0 + lam1
    return lam0 / t, t


# ---------------------------------------------------------------------------
# pair validation


def validate_pair(env0: Environment, env1: Environment) -> EnvPair:
    """Check both environments favor x and relabel so that ``a0 <= a1``.

    When the labels are exchanged the returned pair carries
    ``canonical_order_swapped=True``; switching rates expressed in the input
    labels must then be swapped too (see :meth:`SwitchRates.swapped`).
    """
    for label, env in (("env0", env0), ("env1", env1)):
        if not env.a < env.c:
            raise NotFavorableToX(f"{label}: standing assumption a < c fails (a={env.a}, c={env.c})")
        if not env.b < env.d:
            raise NotFavorableToX(f"{label}: standing assumption b < d fails (b={env.b}, d={env.d})")
    if env0.a > env1.a:
        return EnvPair(env1, env0, canonical_order_swapped=True)
    return EnvPair(env0, env1)


def pair_report(pair: EnvPair) -> dict:
    ci = intervals(pair)
    notes = []
    if pair.env0.a == pair.env1.a:
        notes.append("a0 == a1: I is empty")
    elif pair.env0.c >= pair.env1.a:
        notes.append("c0 >= a1: I is empty")
    if ci.I is None:
        notes.append("I is empty")
    if ci.J is None:
        notes.append("J is empty")
    if ci.I is not None and ci.J is not None and ci.I_and_J is None:
        notes.append("I and J are disjoint")
    return {"configuration": pair.configuration(), "notes": notes}


def relabeled(pair: EnvPair) -> EnvPair:
    """The same pair with the environment labels exchanged (no validation)."""
    return replace(pair, env0=pair.env1, env1=pair.env0, canonical_order_swapped=not pair.canonical_order_swapped)
