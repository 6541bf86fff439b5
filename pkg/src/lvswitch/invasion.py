"""Invasion rates of the switched Lotka-Volterra system.

The rate at which species y invades the x-resident system is

    Lambda_y(u, v) = E[phi(U)] / (delta * ((1 - u)/alpha0 + u/alpha1)),
    U ~ Beta(u v, (1 - u) v),

where ``phi(y) = A2 / (a0 + delta y) + A1 + A0 (a0 + delta y)`` and
``delta = a1 - a0 > 0``.  The same formula with the species exchanged gives
``Lambda_x``.  Everything here is written for a generic *resident*
(rates ``r_i``, self-competition ``k_i``) and *invader* (rates ``g_i``,
cross-competition ``h_i``):

    species y invading:  resident (alpha_i, a_i), invader (beta_i, c_i)
    species x invading:  resident (beta_i, d_i),  invader (alpha_i, b_i)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import _kernels
from .env_model import EnvPair, SwitchRates
from .errors import DegenerateResident, InputError, QuadratureFailure, ToleranceUnreachable

MAX_SERIES_TERMS = 10**6
SERIES_TOL = 1e-14
QUAD_TOL = 1e-11


@dataclass(frozen=True)
class ResidentSpec:
    r0: float
    r1: float
    k0: float
    k1: float


@dataclass(frozen=True)
class InvaderSpec:
    g0: float
    g1: float
    h0: float
    h1: float


def species_roles(pair: EnvPair, species: str) -> tuple:
    """(resident, invader) specs for the invasion of ``species`` ('x' or 'y')."""
    e0, e1 = pair.env0, pair.env1
    if species == "y":
        return ResidentSpec(e0.alpha, e1.alpha, e0.a, e1.a), InvaderSpec(e0.beta, e1.beta, e0.c, e1.c)
    if species == "x":
        return ResidentSpec(e0.beta, e1.beta, e0.d, e1.d), InvaderSpec(e0.alpha, e1.alpha, e0.b, e1.b)
    raise InputError(f"species must be 'x' or 'y', got {species!r}")


def _canonical(res: ResidentSpec, inv: InvaderSpec, rates: SwitchRates) -> tuple:
    if res.k0 <= res.k1:
        return res, inv, rates
    return (
        ResidentSpec(res.r1, res.r0, res.k1, res.k0),
        InvaderSpec(inv.g1, inv.g0, inv.h1, inv.h0),
        rates.swapped(),
    )


@dataclass(frozen=True)
class PhiFunction:
    A2: float
    A1: float
    A0: float
    a_lo: float
    a_hi: float

    @property
    def delta(self) -> float:
        return self.a_hi - self.a_lo

    def __call__(self, y):
        w = self.a_lo + self.delta * np.asarray(y, dtype=float)
        out = self.A2 / w + self.A1 + self.A0 * w
        return float(out) if out.ndim == 0 else out

    def poly(self, x):
        """The quadratic ``P(x) = A0 x^2 + A1 x + A2``, so ``phi(y) = P(p) / p`` with ``p = a_lo + delta y``."""
        return (self.A0 * x + self.A1) * x + self.A2


def phi_build(res: ResidentSpec, inv: InvaderSpec) -> PhiFunction:
    if not res.k0 < res.k1:
        raise DegenerateResident(f"phi requires k0 < k1, got k0={res.k0}, k1={res.k1}")
    w0, w1 = inv.g0 / res.r0, inv.g1 / res.r1
    return PhiFunction(
        A2=w1 * inv.h1 * res.k0 - w0 * inv.h0 * res.k1,
        A1=-w1 * (inv.h1 + res.k0) + w0 * (inv.h0 + res.k1),
        A0=w1 - w0,
        a_lo=res.k0,
        a_hi=res.k1,
    )


def phi_eval(phi: PhiFunction, y):
    return phi(y)


# ---------------------------------------------------------------------------
# E[phi(U)] for U ~ Beta(u v, (1 - u) v)


def _inverse_moment_series(a_hi, delta, q, v, tol, max_terms):
    """E[1/(a_hi - delta V)] for V ~ Beta(q, v - q), as a power series.

    Returns ``(value, error_bound, terms)``.  The bound uses that the moments
    ``m_k = E[V^k]`` are nonincreasing, so the tail after ``K`` terms is at
    most ``m_{K+1} rho^{K+1} / (1 - rho) / a_hi`` with ``rho = delta / a_hi``.
    """
    rho = delta / a_hi
    if rho == 0.0:
        return 1.0 / a_hi, 0.0, 1
    total, term = 1.0, 1.0
    k = 0
    while True:
        k += 1
        term *= rho * (q + k - 1) / (v + k - 1)
        total += term
        tail = term * rho / (1.0 - rho) / a_hi
        if tail < tol:
            return total / a_hi, tail, k + 1
        if k >= max_terms:
            raise ToleranceUnreachable(f"series needs more than {max_terms} terms (delta/a_hi = {rho:.6g})")


def beta_expectation_series(phi: PhiFunction, u: float, v: float, tol: float = SERIES_TOL, max_terms: int = MAX_SERIES_TERMS) -> float:
    """E[phi(U_{u,v})] from the moment series of ``1/(a_hi - delta U_{1-u,v})``."""
    return _expectation_series(phi, u, v, tol, max_terms)[0]


def _expectation_series(phi, u, v, tol, max_terms):
    _check_uv(u, v)
    scale = max(abs(phi.A2), 1e-300)
    inv_moment, err, _ = _inverse_moment_series(phi.a_hi, phi.delta, (1.0 - u) * v, v, tol / scale, max_terms)
    value = phi.A2 * inv_moment + phi.A1 + phi.A0 * (phi.a_lo + phi.delta * u)
    return value, abs(phi.A2) * err


def _check_uv(u, v):
    if not 0.0 < u < 1.0:
        raise InputError(f"u must lie in (0, 1), got {u!r}")
    if not v > 0.0:
        raise InputError(f"v must be positive, got {v!r}")


def beta_expect(f, p: float, q: float, epsabs: float = QUAD_TOL) -> tuple:
    """E[f(U)] for U ~ Beta(p, q) by adaptive quadrature.

    The unit interval is cut around the mean.  On an end piece whose exponent
    is below one the substitution ``y = w**(1/p)`` (mirrored at 1) absorbs the
    integrable singularity of the density.  Returns ``(value, abserr)``.
    """
    log_b = special.betaln(p, q)
    mean = p / (p + q)
    sd = math.sqrt(p * q / ((p + q) ** 2 * (p + q + 1.0)))
    y_a = max(mean - 10.0 * sd, 0.5 * mean)
    y_b = min(mean + 10.0 * sd, 0.5 * (1.0 + mean))

    def density(y):
        return math.exp((p - 1.0) * math.log(y) + (q - 1.0) * math.log1p(-y) - log_b)

    def interior(y):
        return f(y) * density(y)

    pieces = []
    if p < 1.0:
        def left(w):
            y = w ** (1.0 / p)
            return f(y) * math.exp((q - 1.0) * math.log1p(-y) - log_b) / p

        pieces.append((left, 0.0, y_a**p))
    else:
        pieces.append((interior, 0.0, y_a))
    pieces.append((interior, y_a, mean))
    pieces.append((interior, mean, y_b))
    if q < 1.0:
        def right(w):
            y = 1.0 - w ** (1.0 / q)
            return f(y) * math.exp((p - 1.0) * math.log(y) - log_b) / q

        pieces.append((right, 0.0, (1.0 - y_b) ** q))
    else:
        pieces.append((interior, y_b, 1.0))

    total, err = 0.0, 0.0
    for g, lo, hi in pieces:
        if hi <= lo:
            continue
        val, e = integrate.quad(g, lo, hi, epsabs=epsabs / 8.0, epsrel=1e-14, limit=400)
        total += val
        err += e
    if err > epsabs:
        raise QuadratureFailure(f"Beta({p:.6g}, {q:.6g}) expectation reached error {err:.3g} > {epsabs:.3g}", err)
    return total, err


def beta_expectation_quadrature(phi: PhiFunction, u: float, v: float, epsabs: float = QUAD_TOL) -> float:
    _check_uv(u, v)
    return beta_expect(phi, u * v, (1.0 - u) * v, epsabs)[0]


def phi_expectation(phi: PhiFunction, u: float, v: float, tol: float = SERIES_TOL) -> tuple:
    """E[phi(U_{u,v})] by the series, falling back to quadrature.

    Returns ``(value, error_estimate, method)``.
    """
    try:
        value, err = _expectation_series(phi, u, v, tol, MAX_SERIES_TERMS)
        return value, err, "series"
    except ToleranceUnreachable:
        value, err = beta_expect(phi, u * v, (1.0 - u) * v, max(tol, QUAD_TOL))
        return value, err, "quadrature"


# ---------------------------------------------------------------------------
# invasion rates


@dataclass(frozen=True)
class InvasionResult:
    lambda_x: float
    lambda_y: float
    method: str
    error_estimate: float


def invasion_rate_detail(res: ResidentSpec, inv: InvaderSpec, rates: SwitchRates) -> tuple:
    """Invasion rate with its error bound and evaluation path tag."""
    res, inv, rates = _canonical(res, inv, rates)
    if res.k0 == res.k1:
        k = res.k0
        pi1 = rates.s
        value = (1.0 - pi1) * inv.g0 * (1.0 - inv.h0 / k) + pi1 * inv.g1 * (1.0 - inv.h1 / k)
        return value, 0.0, "degenerate"
    phi = phi_build(res, inv)
    g0, g1 = rates.gammas(res.r0, res.r1)
    u, v = g0 / (g0 + g1), g0 + g1
    expectation, err, method = phi_expectation(phi, u, v)
    prefactor = 1.0 / (phi.delta * ((1.0 - u) / res.r0 + u / res.r1))
    return prefactor * expectation, prefactor * err, method


def invasion_rate(res: ResidentSpec, inv: InvaderSpec, rates: SwitchRates) -> float:
    return invasion_rate_detail(res, inv, rates)[0]


def lambda_xy(pair: EnvPair, rates: SwitchRates) -> InvasionResult:
    """Both invasion rates; ``rates`` are expressed in the pair's labels."""
    ly, ey, my = invasion_rate_detail(*species_roles(pair, "y"), rates)
    lx, ex, mx = invasion_rate_detail(*species_roles(pair, "x"), rates)
    method = mx if mx == my else f"x:{mx},y:{my}"
    return InvasionResult(lambda_x=lx, lambda_y=ly, method=method, error_estimate=max(ex, ey))


def limit_rate(res: ResidentSpec, inv: InvaderSpec, s: float) -> float:
    """Frequent-switching limit ``sum_i pi_i g_i (1 - h_i / k_s)`` with ``pi_1 = s``."""
    k_s = ((1 - s) * res.r0 * res.k0 + s * res.r1 * res.k1) / ((1 - s) * res.r0 + s * res.r1)
    return (1 - s) * inv.g0 * (1 - inv.h0 / k_s) + s * inv.g1 * (1 - inv.h1 / k_s)


# ---------------------------------------------------------------------------
# cross-check: the integral over the resident's recurrent interval


def _endpoint_quad(g, kappa_lo, kappa_hi, epsrel, log_weight, shift):
    """``int_0^1 g(y) y^(kappa_lo-1) (1-y)^(kappa_hi-1) exp(log_weight(y) - shift) dy``.

    Powers are combined in log space so that large exponents neither
    overflow nor underflow; exponents below one get the substitution
    ``w = y^kappa`` (or ``(1-y)^kappa``) to remove the endpoint singularity.
    """

    def plain(y):
        return g(y) * math.exp((kappa_lo - 1.0) * math.log(y) + (kappa_hi - 1.0) * math.log1p(-y) + log_weight(y) - shift)

    def left(w):
        y = w ** (1.0 / kappa_lo)
        return g(y) * math.exp((kappa_hi - 1.0) * math.log1p(-y) + log_weight(y) - shift) / kappa_lo

    def right(w):
        y = 1.0 - w ** (1.0 / kappa_hi)
        return g(y) * math.exp((kappa_lo - 1.0) * math.log(y) + log_weight(y) - shift) / kappa_hi

    halves = [
        (left, 0.0, 0.5**kappa_lo) if kappa_lo < 1.0 else (plain, 0.0, 0.5),
        (right, 0.0, 0.5**kappa_hi) if kappa_hi < 1.0 else (plain, 0.5, 1.0),
    ]
    total, err = 0.0, 0.0
    for fn, a, b in halves:
        val, e = integrate.quad(fn, a, b, epsabs=0.0, epsrel=epsrel, limit=400)
        total += val
        err += e
    if err > 1e3 * epsrel * abs(total):
        raise QuadratureFailure(f"endpoint integral error {err:.3g} for value {total:.6g}", err)
    return total


def invasion_rate_direct(res: ResidentSpec, inv: InvaderSpec, rates: SwitchRates, epsrel: float = 1e-12) -> float:
    """Invasion rate from the stationary density of the resident on [1/k1, 1/k0].

    Independent of the Beta representation: three integrals over ``x`` with
    algebraic endpoint singularities are evaluated directly, after mapping
    ``x = 1/k1 + (1/k0 - 1/k1) y`` and dropping factors common to all three.
    """
    res, inv, rates = _canonical(res, inv, rates)
    if not res.k0 < res.k1:
        raise DegenerateResident("direct integral needs k0 != k1")
    p0, p1 = 1.0 / res.k0, 1.0 / res.k1
    length = p0 - p1
    g0, g1 = rates.gammas(res.r0, res.r1)
    w0, w1 = inv.g0 / res.r0, inv.g1 / res.r1
    expo = -(g0 + g1) - 1.0

    def poly(y):
        x = p1 + length * y
        return w1 * (1 - inv.h1 * x) * (1 - res.k0 * x) - w0 * (1 - inv.h0 * x) * (1 - res.k1 * x)

    def one(y):
        return 1.0

    def log_power(y):
        # x^expo relative to p1^expo
        return expo * math.log1p(length * y / p1)

    # theta(x) = |x - p0|^(g0-1) |p1 - x|^(g1-1) x^(-g0-g1-1), on [p1, p0]
    ys = np.linspace(0.0, 1.0, 2001)[1:-1]
    shift = float(np.max((g1 - 1.0) * np.log(ys) + (g0 - 1.0) * np.log1p(-ys) + expo * np.log1p(length * ys / p1)))
    main = _endpoint_quad(poly, g1, g0, epsrel, log_power, shift)
    norm1 = _endpoint_quad(one, g1, g0 + 1.0, epsrel, log_power, shift)
    norm0 = _endpoint_quad(one, g1 + 1.0, g0, epsrel, log_power, shift)
    inv_c = length * (p1 / res.r1 * norm1 + p0 / res.r0 * norm0)
    return p0 * p1 * main / inv_c


# ---------------------------------------------------------------------------
# Monte Carlo oracle


def exponential_stream(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))))


def standard_exponentials(rng: np.random.Generator, n: int) -> np.ndarray:
    """Inverse-transform exponential draws from the 53-bit uniform stream."""
    return -np.log1p(-rng.random(n))


def mc_invasion(
    res: ResidentSpec,
    inv: InvaderSpec,
    rates: SwitchRates,
    horizon: float = 1e4,
    replicates: int = 16,
    seed: int = 0,
    burn_fraction: float = 0.1,
) -> tuple:
    """Monte Carlo estimate of the invasion rate and its replicate standard error.

    Each replicate simulates the resident's logistic PDMP with exact flows
    and averages ``g_I (1 - h_I X)`` over ``[burn, horizon]``.
    """
    if not horizon > 0:
        raise InputError("horizon must be positive")
    if replicates < 2:
        raise InputError("replicates must be at least 2")
    r = np.array([res.r0, res.r1])
    k = np.array([res.k0, res.k1])
    g = np.array([inv.g0, inv.g1])
    h = np.array([inv.h0, inv.h1])
    lam = np.array([rates.lambda0, rates.lambda1])
    burn = burn_fraction * horizon
    expected = horizon * 2.0 * rates.lambda0 * rates.lambda1 / rates.t
    chunk = int(1.2 * expected) + 1024
    means = np.empty(replicates)
    for rep in range(replicates):
        rng = exponential_stream(seed, rep)
        exps = standard_exponentials(rng, chunk)
        while True:
            avg, _, done = _kernels.logistic_pdmp_average(r, k, g, h, lam, exps, 1.0 / k[0], 0, horizon, burn)
            if done:
                break
            exps = np.concatenate([exps, standard_exponentials(rng, chunk)])
        means[rep] = avg
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(replicates))


# ---------------------------------------------------------------------------
# convex order of Beta laws


@dataclass(frozen=True)
class ConvexOrderReport:
    u: float
    v: float
    v_prime: float
    max_violation: float
    holds: bool
    var_v: float
    var_v_prime: float


def integrated_beta_cdf(x, p: float, q: float):
    """``int_0^x F(t) dt = x F(x) - E[U; U <= x]`` for U ~ Beta(p, q).

    Regularized incomplete beta from ``scipy.special.betainc`` (Boost
    ``ibeta``, after DiDonato and Morris, ACM TOMS 708).
    """
    x = np.asarray(x, dtype=float)
    return x * special.betainc(p, q, x) - p / (p + q) * special.betainc(p + 1.0, q, x)


def beta_convex_order_check(u: float, v: float, v_prime: float, grid: int = 1000, slack: float = 1e-9) -> ConvexOrderReport:
    """Check ``U_{u,v'} <=_cvx U_{u,v}`` through integrated CDFs on a grid."""
    if not v <= v_prime:
        raise InputError("need v <= v_prime")
    xs = np.linspace(0.0, 1.0, grid)
    small = integrated_beta_cdf(xs, u * v_prime, (1 - u) * v_prime)
    big = integrated_beta_cdf(xs, u * v, (1 - u) * v)
    violation = float(np.max(small - big))
    return ConvexOrderReport(
        u=u,
        v=v,
        v_prime=v_prime,
        max_violation=violation,
        holds=violation <= slack,
        var_v=u * (1 - u) / (v + 1),
        var_v_prime=u * (1 - u) / (v_prime + 1),
    )
