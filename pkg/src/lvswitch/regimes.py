"""Regimes from invasion-rate signs and the critical curves separating them.

For fixed ``s`` the map ``t -> Lambda_y(s, t)`` is increasing: negative for
rare switching and, when ``s`` lies in I, positive for frequent switching.
Its unique zero ``t_y(s)`` is located by bisection in ``log t``.  The same
holds for ``-Lambda_x`` on J.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .env_model import EnvPair, SwitchRates, in_interval, intervals, st_to_uv
from .errors import BracketFailure, FrontierValue, InputError, NumericalError
from .invasion import invasion_rate, lambda_xy, species_roles

T_MIN, T_MAX = 1e-8, 1e12
FRONTIER_EPS = 1e-12
ENDPOINT_MARGIN = 1e-4


class Regime(str, Enum):
    PERSISTENCE_BOTH = "PersistenceBoth"
    EXTINCTION_Y = "ExtinctionY"
    EXTINCTION_X = "ExtinctionX"
    RANDOM_EXTINCTION = "RandomExtinction"
    FRONTIER = "Frontier"


def classify_regime(lambda_x: float, lambda_y: float) -> Regime:
    if lambda_x == 0.0 or lambda_y == 0.0:
        raise FrontierValue(f"invasion rate exactly zero: ({lambda_x}, {lambda_y})")
    if lambda_x > 0:
        return Regime.PERSISTENCE_BOTH if lambda_y > 0 else Regime.EXTINCTION_Y
    return Regime.EXTINCTION_X if lambda_y > 0 else Regime.RANDOM_EXTINCTION


def domain(pair: EnvPair, species: str):
    ci = intervals(pair)
    if species == "y":
        return ci.I
    if species == "x":
        return ci.J
    raise InputError(f"species must be 'x' or 'y', got {species!r}")


def signed_rate(pair: EnvPair, species: str, s: float, t: float) -> float:
    """``Lambda_y`` or ``-Lambda_x``: increasing in ``t`` on the domain."""
    res, inv = species_roles(pair, species)
    value = invasion_rate(res, inv, SwitchRates.from_st(s, t))
    return value if species == "y" else -value


def critical_t(pair: EnvPair, species: str, s: float, tol: float = 1e-9, t0: float = 1.0) -> float:
    """Critical total switching rate ``t_species(s)``, or ``inf`` off the domain."""
    if not 0.0 < s < 1.0:
        raise InputError(f"s must lie in (0, 1), got {s!r}")
    if not in_interval(s, domain(pair, species)):
        return math.inf

    def f(t):
        return signed_rate(pair, species, s, t)

    t0 = min(max(t0, T_MIN), T_MAX)
    f0 = f(t0)
    if f0 < 0:
        lo, hi = t0, t0
        while True:
            hi *= 2.0
            if hi > T_MAX:
                raise BracketFailure(f"no sign change for s={s} up to t={T_MAX:g}")
            if f(hi) > 0:
                break
            lo = hi
    else:
        lo, hi = t0, t0
        while True:
            lo /= 2.0
            if lo < T_MIN:
                raise BracketFailure(f"no sign change for s={s} down to t={T_MIN:g}")
            if f(lo) < 0:
                break
            hi = lo
        if f0 == 0.0:
            return t0
    while hi / lo > 1.0 + tol:
        mid = math.sqrt(lo * hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


@dataclass
class CriticalCurve:
    species: str
    s: np.ndarray
    t: np.ndarray  # inf off the domain, nan where the root search failed
    domain: tuple
    tolerance: float

    @property
    def failed(self) -> np.ndarray:
        return np.isnan(self.t)

    def samples(self) -> list:
        return list(zip(self.s.tolist(), self.t.tolist()))


def curve_grid(interval, count: int, margin: float = ENDPOINT_MARGIN) -> np.ndarray:
    lo, hi = interval
    pad = margin * (hi - lo)
    return np.linspace(lo + pad, hi - pad, count)


def _critical_or_nan(args):
    pair, species, s, tol, t0 = args
    try:
        return critical_t(pair, species, s, tol, t0)
    except NumericalError:
        return math.nan


def resolve_workers(workers=None) -> int:
    if workers is None:
        workers = int(os.environ.get("LV_SWITCH_THREADS", "1") or 1)
    return max(1, int(workers))


def critical_curve(pair: EnvPair, species: str, s_count: int = 64, tol: float = 1e-9, workers=None) -> CriticalCurve:
    """Sample ``t_species`` on a uniform grid inside its domain interval.

    Serially, each root search starts from the previous root.  With several
    workers every sample starts from ``t0 = 1`` so results do not depend on
    scheduling.
    """
    if s_count < 3:
        raise InputError("s_count must be at least 3")
    dom = domain(pair, species)
    if dom is None:
        return CriticalCurve(species, np.empty(0), np.empty(0), None, tol)
    grid = curve_grid(dom, s_count)
    workers = resolve_workers(workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            ts = list(pool.map(_critical_or_nan, [(pair, species, float(s), tol, 1.0) for s in grid]))
    else:
        ts, t0 = [], 1.0
        for s in grid:
            t = _critical_or_nan((pair, species, float(s), tol, t0))
            ts.append(t)
            if math.isfinite(t):
                t0 = t
    return CriticalCurve(species, grid, np.array(ts), dom, tol)


def transport_to_uv(pair: EnvPair, curve: CriticalCurve) -> tuple:
    """Map the curve samples ``(s, t)`` to ``(u, v)`` coordinates."""
    uv = [st_to_uv(pair, s, t) for s, t in zip(curve.s, curve.t)]
    if not uv:
        return np.empty(0), np.empty(0)
    u, v = np.array(uv).T
    return u, v


# ---------------------------------------------------------------------------
# regime maps


@dataclass
class RegimeMap:
    s: np.ndarray
    t: np.ndarray
    lambda_x: np.ndarray  # shape (len(s), len(t))
    lambda_y: np.ndarray
    labels: np.ndarray

    def census(self) -> set:
        return set(self.labels.ravel().tolist())

    def rows(self):
        for i, s in enumerate(self.s):
            for j, t in enumerate(self.t):
                yield float(s), float(t), self.labels[i, j]


def _row(args):
    pair, s, t_grid = args
    out = []
    for t in t_grid:
        r = lambda_xy(pair, SwitchRates.from_st(float(s), float(t)))
        out.append((r.lambda_x, r.lambda_y))
    return out


def label(lambda_x: float, lambda_y: float, eps: float = FRONTIER_EPS) -> str:
    if abs(lambda_x) < eps or abs(lambda_y) < eps:
        return Regime.FRONTIER.value
    return classify_regime(lambda_x, lambda_y).value


def regime_map(pair: EnvPair, s_grid, t_grid, workers=None) -> RegimeMap:
    s_grid = np.asarray(s_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if s_grid.size == 0 or t_grid.size == 0:
        raise InputError("grids must be nonempty")
    if np.any(t_grid <= 0):
        raise InputError("t values must be positive")
    workers = resolve_workers(workers)
    tasks = [(pair, s, t_grid) for s in s_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(task) for task in tasks]
    values = np.array(rows)
    lx, ly = values[..., 0], values[..., 1]
    labels = np.vectorize(label, otypes=[object])(lx, ly)
    return RegimeMap(s=s_grid, t=t_grid, lambda_x=lx, lambda_y=ly, labels=labels)


# ---------------------------------------------------------------------------
# shape diagnostics


@dataclass(frozen=True)
class QuasiConvexReport:
    quasi_convex: bool
    max_violation: float  # relative excess of t_j over the best bound max(t_i, t_k)
    convex: bool
    samples: int


def check_quasi_convex(values, positions=None, rel_tol: float = 1e-9) -> QuasiConvexReport:
    """Quasi-convexity of sampled values: ``t_j <= max(t_i, t_k)`` for all ``i < j < k``.

    For each ``j`` the tightest bound over triples is
    ``max(min_{i<j} t_i, min_{k>j} t_k)``, so the check is linear in the
    number of samples.  Discrete convexity (on ``positions``, uniform by
    default) is reported but never required.
    """
    if isinstance(values, CriticalCurve):
        positions = values.s if positions is None else positions
        values = values.t
    t = np.asarray(values, dtype=float)
    finite = np.isfinite(t)
    if positions is None:
        positions = np.arange(len(t), dtype=float)
    positions = np.asarray(positions, dtype=float)[finite]
    t = t[finite]
    if len(t) < 3:
        raise InputError("need at least three finite samples")
    prefix = np.minimum.accumulate(t)[:-2]
    suffix = np.minimum.accumulate(t[::-1])[::-1][2:]
    bound = np.maximum(prefix, suffix)
    excess = (t[1:-1] - bound) / bound
    max_violation = float(max(0.0, excess.max()))
    # convexity: slopes nondecreasing
    slopes = np.diff(t) / np.diff(positions)
    convex = bool(np.all(np.diff(slopes) >= -1e-9 * np.abs(slopes[1:]).clip(min=1.0)))
    return QuasiConvexReport(
        quasi_convex=bool(max_violation <= rel_tol), max_violation=max_violation, convex=convex, samples=int(len(t))
    )
