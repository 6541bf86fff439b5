"""Geometry of the support of the persistent invariant measure.

The fields ``F0`` and ``F1`` are collinear on the axes and on the conic
``G = 0``, where ``det(F0, F1)(x, y) = x y G(x, y)``.  Inside the quadrant
that conic is the set of equilibria of the weighted fields
``w0 F0 + w1 F1``; for ``w0, w1 >= 0`` these are the equilibria of the
averaged environments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env_model import EnvPair, interior_equilibrium, intervals, jacobian, mix
from .errors import (
    ContinuationFailure,
    InputError,
    NonConvergentTrajectory,
    PreconditionViolated,
    SingularIsoclines,
)
from .pdmp import integrate_flow, unstable_manifold

SCAN_POINTS = 20001
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ConicG:
    g20: float
    g11: float
    g02: float
    g10: float
    g01: float
    g00: float

    @property
    def coefficients(self) -> tuple:
        return (self.g20, self.g11, self.g02, self.g10, self.g01, self.g00)

    def __call__(self, x, y):
        return self.g20 * x * x + self.g11 * x * y + self.g02 * y * y + self.g10 * x + self.g01 * y + self.g00

    def gradient(self, x, y):
        return 2 * self.g20 * x + self.g11 * y + self.g10, self.g11 * x + 2 * self.g02 * y + self.g01

    @property
    def degree(self) -> int:
        if any(self.coefficients[:3]):
            return 2
        if any(self.coefficients[3:5]):
            return 1
        return 0 if self.g00 else -1


def _product(p, a, b, c, d) -> np.ndarray:
    # p (1 - a x - b y)(1 - c x - d y) as (x^2, xy, y^2, x, y, 1)
    return p * np.array([a * c, a * d + b * c, b * d, -(a + c), -(b + d), 1.0])


def conic_coeffs(pair: EnvPair) -> ConicG:
    e0, e1 = pair.env0, pair.env1
    coeffs = _product(e0.alpha * e1.beta, e0.a, e0.b, e1.c, e1.d) - _product(e1.alpha * e0.beta, e1.a, e1.b, e0.c, e0.d)
    return ConicG(*coeffs.tolist())


def field_det(pair: EnvPair, x, y):
    """``det(F0, F1)`` evaluated directly from the two fields."""
    e0, e1 = pair.env0, pair.env1
    f0x = e0.alpha * x * (1 - e0.a * x - e0.b * y)
    f0y = e0.beta * y * (1 - e0.c * x - e0.d * y)
    f1x = e1.alpha * x * (1 - e1.a * x - e1.b * y)
    f1y = e1.beta * y * (1 - e1.c * x - e1.d * y)
    return f0x * f1y - f0y * f1x


# ---------------------------------------------------------------------------
# equilibria of weighted fields


def weighted_equilibrium(pair: EnvPair, w0, w1):
    """Zero of ``w0 F0 + w1 F1`` off the axes (vectorized over weights)."""
    e0, e1 = pair.env0, pair.env1
    w0, w1 = np.asarray(w0, dtype=float), np.asarray(w1, dtype=float)
    m11 = w0 * e0.alpha * e0.a + w1 * e1.alpha * e1.a
    m12 = w0 * e0.alpha * e0.b + w1 * e1.alpha * e1.b
    r1 = w0 * e0.alpha + w1 * e1.alpha
    m21 = w0 * e0.beta * e0.c + w1 * e1.beta * e1.c
    m22 = w0 * e0.beta * e0.d + w1 * e1.beta * e1.d
    r2 = w0 * e0.beta + w1 * e1.beta
    det = m11 * m22 - m12 * m21
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (r1 * m22 - m12 * r2) / det
        y = (m11 * r2 - r1 * m21) / det
    return x, y, det


@dataclass
class EquilibriumCurve:
    s: np.ndarray
    points: np.ndarray
    skipped: list = field(default_factory=list)  # (s, reason)


def equilibrium_curve(pair: EnvPair, s_grid) -> EquilibriumCurve:
    """Interior equilibria of the averaged environments along ``s_grid``."""
    kept_s, points, skipped = [], [], []
    for s in np.asarray(s_grid, dtype=float):
        env = mix(pair, float(s))
        if env.a * env.d - env.b * env.c == 0.0:
            skipped.append((float(s), SingularIsoclines.__name__))
            continue
        z = interior_equilibrium(env)
        if z[0] > 0 and z[1] > 0:
            kept_s.append(float(s))
            points.append(z)
        else:
            skipped.append((float(s), "outside quadrant"))
    pts = np.array(points) if points else np.empty((0, 2))
    return EquilibriumCurve(s=np.array(kept_s), points=pts, skipped=skipped)


# ---------------------------------------------------------------------------
# tangency set


@dataclass(frozen=True)
class TangencyPoint:
    x: float
    y: float
    residual_G: float
    residual_tangency: float
    angle: float  # weight direction (cos, sin) = (w0, w1) generating the point

    @property
    def s(self) -> float:
        """Mixing parameter of the point; outside [0, 1] on the continued branch."""
        w0, w1 = math.cos(self.angle), math.sin(self.angle)
        return w1 / (w0 + w1) if w0 + w1 != 0.0 else math.inf

    def as_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "residual_G": self.residual_G, "residual_tangency": self.residual_tangency}


@dataclass
class TangencySet:
    points: list
    conic: ConicG

    def __len__(self):
        return len(self.points)


def _tangency_function(pair: EnvPair, conic: ConicG):
    e0 = pair.env0

    def h(x, y):
        gx, gy = conic.gradient(x, y)
        return e0.alpha * x * (1 - e0.a * x - e0.b * y) * gx + e0.beta * y * (1 - e0.c * x - e0.d * y) * gy

    def grad_h(x, y):
        gx, gy = conic.gradient(x, y)
        f = np.array([e0.alpha * x * (1 - e0.a * x - e0.b * y), e0.beta * y * (1 - e0.c * x - e0.d * y)])
        hess = np.array([[2 * conic.g20, conic.g11], [conic.g11, 2 * conic.g02]])
        return jacobian(e0, (x, y)).T @ np.array([gx, gy]) + hess @ f

    return h, grad_h


def _newton_polish(conic, h, grad_h, x, y, steps=8):
    for _ in range(steps):
        r = np.array([conic(x, y), h(x, y)])
        jac = np.array([conic.gradient(x, y), grad_h(x, y)])
        try:
            dx, dy = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        x, y = x + dx, y + dy
        if math.hypot(dx, dy) < 1e-15 * max(1.0, math.hypot(x, y)):
            break
    return x, y


def tangency_set(pair: EnvPair, scan_points: int = SCAN_POINTS) -> TangencySet:
    """Points of the quadrant branch of ``G = 0`` where ``F0`` is tangent to it.

    The branch is traced through the equilibria of ``cos(a) F0 + sin(a) F1``
    for ``a`` in ``(0, pi)``; sign changes of ``F0 . grad G`` along it are
    bisected in ``a`` to 1e-12 and polished by Newton's method on
    ``(G, F0 . grad G)``.  A conic without a quadrant branch gives an empty
    set; candidates whose residuals stay above ``RESIDUAL_TOL`` raise
    :class:`ContinuationFailure` carrying the polished points as ``partial``.
    """
    conic = conic_coeffs(pair)
    if conic.degree < 2:
        raise PreconditionViolated("collinearity conic is degenerate (identical or proportional fields)")
    h, grad_h = _tangency_function(pair, conic)
    angles = np.linspace(0.0, math.pi, scan_points)[1:-1]
    x, y, det = weighted_equilibrium(pair, np.cos(angles), np.sin(angles))
    valid = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if not valid.any():
        return TangencySet(points=[], conic=conic)
    hv = np.where(valid, h(x, y), np.nan)

    def h_at(angle):
        xa, ya, _ = weighted_equilibrium(pair, math.cos(angle), math.sin(angle))
        return float(h(float(xa), float(ya))), float(xa), float(ya)

    found, unpolished = [], []
    for k in np.flatnonzero(valid[:-1] & valid[1:] & (np.sign(hv[:-1]) * np.sign(hv[1:]) <= 0)):
        lo, hi = angles[k], angles[k + 1]
        h_lo = hv[k]
        if hv[k] == 0.0:
            hi = lo
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            h_mid, _, _ = h_at(mid)
            if np.sign(h_mid) == np.sign(h_lo):
                lo, h_lo = mid, h_mid
            else:
                hi = mid
        angle = 0.5 * (lo + hi)
        _, xa, ya = h_at(angle)
        xa, ya = _newton_polish(conic, h, grad_h, xa, ya)
        if not (xa > 0 and ya > 0):
            continue
        if any(math.hypot(xa - p.x, ya - p.y) < 1e-8 for p in found):
            continue
        point = TangencyPoint(xa, ya, abs(conic(xa, ya)), abs(h(xa, ya)), float(angle))
        if point.residual_G < RESIDUAL_TOL and point.residual_tangency < RESIDUAL_TOL:
            found.append(point)
        else:
            unpolished.append(point)
    if unpolished:
        err = ContinuationFailure(f"{len(unpolished)} tangency candidate(s) did not polish below {RESIDUAL_TOL:g}")
        err.partial = TangencySet(points=found, conic=conic)
        err.candidates = unpolished
        raise err
    return TangencySet(points=found, conic=conic)


# ---------------------------------------------------------------------------
# regions and containment


@dataclass
class SupportRegion:
    boundary: np.ndarray  # closed polyline, first point repeated at the end
    construction: str  # "GammaPrime" or "CzRegion"
    arcs: dict  # name -> polyline, in boundary order
    generator_point: tuple = None
    notes: dict = field(default_factory=dict)

    @property
    def area(self) -> float:
        x, y = self.boundary[:, 0], self.boundary[:, 1]
        return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def _closed(arcs: dict) -> np.ndarray:
    pieces = []
    for arc in arcs.values():
        if pieces and np.allclose(pieces[-1][-1], arc[0], atol=0.0, rtol=0.0):
            arc = arc[1:]
        pieces.append(arc)
    boundary = np.vstack(pieces)
    if not np.array_equal(boundary[0], boundary[-1]):
        boundary = np.vstack([boundary, boundary[:1]])
    return boundary


def _sigma(env) -> np.ndarray:
    curve = unstable_manifold(env)
    saddle = np.array([[0.0, 1.0 / env.d]])
    sink = np.array([[1.0 / env.a, 0.0]])
    return np.vstack([saddle, curve.samples, sink])


def gamma_prime_boundary(pair: EnvPair) -> SupportRegion:
    """Region bounded by the two unstable manifolds and the two axis segments.

    Built without the ``I`` and ``J`` precondition; use :func:`gamma_prime`
    for the checked version.
    """
    e0, e1 = pair.env0, pair.env1
    sigma1, sigma0 = _sigma(e1), _sigma(e0)
    arcs = {
        "Sigma1": sigma1,
        "x_axis": np.array([[1.0 / e1.a, 0.0], [1.0 / e0.a, 0.0]]),
        "Sigma0_reversed": sigma0[::-1],
        "y_axis": np.array([[0.0, 1.0 / e0.d], [0.0, 1.0 / e1.d]]),
    }
    region = SupportRegion(boundary=_closed(arcs), construction="GammaPrime", arcs=arcs)
    region.notes["y_axis_segment"] = [1.0 / e0.d, 1.0 / e1.d]
    region.notes["orientation"] = "counterclockwise" if region.area > 0 else "clockwise"
    return region


def gamma_prime(pair: EnvPair) -> SupportRegion:
    if intervals(pair).I_and_J is None:
        raise PreconditionViolated("I and J do not intersect")
    return gamma_prime_boundary(pair)


def _flow_to_sink(env, z, time_cap, offset=1e-6, tol=1e-11):
    sink = (1.0 / env.a, 0.0)

    def near(x, y):
        return math.hypot(x - sink[0], y - sink[1]) < offset

    sol = integrate_flow(env, z, time_cap, tol=tol, stop=near)
    if not sol.stopped:
        raise NonConvergentTrajectory(f"flow from {tuple(z)} did not reach {sink} within t={time_cap}")
    sub = np.linspace(0.0, 1.0, 5)[:-1]
    tt = (sol.times[:-1, None] + np.diff(sol.times)[:, None] * sub[None, :]).ravel()
    pts = sol(np.concatenate([tt, sol.times[-1:]]))
    return np.vstack([pts, [sink]])


def support_region(pair: EnvPair, z, time_cap: float = 1e5) -> SupportRegion:
    """Region enclosed by the two forward orbits of ``z`` and the x-axis segment."""
    z = (float(z[0]), float(z[1]))
    if not (z[0] > 0 and z[1] > 0):
        raise InputError("generator point must lie in the open quadrant")
    e0, e1 = pair.env0, pair.env1
    arc0 = _flow_to_sink(e0, z, time_cap)
    arc1 = _flow_to_sink(e1, z, time_cap)
    arcs = {
        "phi0": arc0,
        "x_axis": np.array([[1.0 / e0.a, 0.0], [1.0 / e1.a, 0.0]]),
        "phi1_reversed": arc1[::-1],
    }
    return SupportRegion(boundary=_closed(arcs), construction="CzRegion", arcs=arcs, generator_point=z)


def contains(region, points, tol: float = 1e-9) -> np.ndarray:
    """Even-odd ray test; points within ``tol`` of the boundary count as inside.

    ``region`` is a :class:`SupportRegion` or a closed polyline array.
    Points are sorted by ``y`` so each edge only touches the points in its
    own ``y`` range.
    """
    boundary = region.boundary if isinstance(region, SupportRegion) else np.asarray(region, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    order = np.argsort(pts[:, 1], kind="stable")
    px, py = pts[order, 0], pts[order, 1]
    inside = np.zeros(len(pts), dtype=bool)
    near = np.zeros(len(pts), dtype=bool)
    for (x1, y1), (x2, y2) in zip(boundary[:-1], boundary[1:]):
        ylo, yhi = (y1, y2) if y1 <= y2 else (y2, y1)
        a, b = np.searchsorted(py, ylo, "left"), np.searchsorted(py, yhi, "left")
        if b > a and y1 != y2:
            sx, sy = px[a:b], py[a:b]
            # half-open rule: edge covers ylo <= y < yhi
            x_cross = x1 + (sy - y1) * (x2 - x1) / (y2 - y1)
            inside[a:b] ^= sx < x_cross
        a, b = np.searchsorted(py, ylo - tol, "left"), np.searchsorted(py, yhi + tol, "right")
        if b > a:
            sx, sy = px[a:b], py[a:b]
            dx, dy = x2 - x1, y2 - y1
            length2 = dx * dx + dy * dy
            if length2 == 0.0:
                dist = np.hypot(sx - x1, sy - y1)
            else:
                lam = np.clip(((sx - x1) * dx + (sy - y1) * dy) / length2, 0.0, 1.0)
                dist = np.hypot(sx - x1 - lam * dx, sy - y1 - lam * dy)
            near[a:b] |= dist <= tol
    result = np.empty(len(pts), dtype=bool)
    result[order] = inside | near
    return result


def inward_flow_check(region: SupportRegion, pair: EnvPair, samples: int = 200) -> dict:
    """Outward normal component of the other field along each manifold arc.

    Along ``Sigma1`` (an orbit of ``F1``) the normal component of ``F0`` is
    ``det(F1, F0) / |F1|``; it must be nonpositive for ``F0`` to point into
    the region, and symmetrically for ``F1`` along ``Sigma0``.
    Returns the largest outward component found on each arc.
    """
    if region.construction != "GammaPrime":
        raise InputError("inward flow check applies to GammaPrime regions")
    e0, e1 = pair.env0, pair.env1
    out = {}
    for name, arc, tangent_env, other_env in (
        ("Sigma1", region.arcs["Sigma1"], e1, e0),
        ("Sigma0", region.arcs["Sigma0_reversed"][::-1], e0, e1),
    ):
        idx = np.linspace(1, len(arc) - 2, samples).round().astype(int)
        x, y = arc[idx, 0], arc[idx, 1]
        tx = tangent_env.alpha * x * (1 - tangent_env.a * x - tangent_env.b * y)
        ty = tangent_env.beta * y * (1 - tangent_env.c * x - tangent_env.d * y)
        ox = other_env.alpha * x * (1 - other_env.a * x - other_env.b * y)
        oy = other_env.beta * y * (1 - other_env.c * x - other_env.d * y)
        norm = np.hypot(tx, ty)
        # Sigma1 is traversed along F1, Sigma0 against F0; flip for clockwise boundaries
        sign = (1.0 if name == "Sigma1" else -1.0) * math.copysign(1.0, region.area)
        outward = sign * (ty * ox - tx * oy) / norm
        out[name] = float(outward.max())
    return out
