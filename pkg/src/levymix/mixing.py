"""Mixing convolution-power families through a jump measure.

The central object is the map that sends a jump measure rho on (0, inf) to
the mixed measure A -> integral of mu^s(A) rho(ds), where mu^s is the s-th
convolution power of an infinitely divisible law mu.  Everything here
evaluates interval masses, densities or transforms of that mixed measure
without materializing it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import quadrature
from .core import (
    INF,
    LawFamily,
    LevyMeasure,
    LevyTriplet,
    MeasureFamily,
    char_exponent,
    levy_dist_scale,
)
from .errors import DomainError, QuadratureFailure, UnsupportedFamily


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint half-open intervals (lo, hi], none of which contains 0.

    Sets touching 0 (lo == 0) are legal but only usable against finite
    mixing measures; the evaluators enforce that.
    """

    intervals: tuple

    def __post_init__(self):
        cleaned = []
        for lo, hi in self.intervals:
            lo, hi = float(lo), float(hi)
            if not hi > lo:
                raise DomainError(f"interval ({lo}, {hi}] is empty")
            if lo < 0.0 <= hi:
                raise DomainError(f"interval ({lo}, {hi}] contains 0")
            cleaned.append((lo, hi))
        cleaned.sort()
        for (_, hi_prev), (lo_next, _) in zip(cleaned, cleaned[1:]):
            if lo_next < hi_prev:
                raise DomainError("intervals must be pairwise disjoint")
        object.__setattr__(self, "intervals", tuple(cleaned))

    @classmethod
    def of(cls, lo, hi):
        return cls(((lo, hi),))

    @property
    def distance_from_zero(self):
        d = INF
        for lo, hi in self.intervals:
            d = min(d, lo if lo >= 0 else -hi)
        return d


@dataclass(frozen=True)
class MixResult:
    value: float
    abs_error_estimate: float
    truncation_point: float


# ---------------------------------------------------------------------------
# Convolution powers mu^s in closed form, keyed by the law tag.


def _require_tag(mu: LevyTriplet):
    if mu.law_family is None:
        raise UnsupportedFamily(
            "convolution powers need a law-tagged triplet (use the law constructors)"
        )
    return mu.law_family


def _poisson_count_cdf(n, mean):
    """P(K <= n) for K Poisson(mean); n may be any float (floored)."""
    if n < 0:
        return 0.0
    if math.isinf(n):
        return 1.0
    if mean == 0.0:
        return 1.0
    return float(special.gammaincc(math.floor(n) + 1.0, mean))


def conv_power_cdf(mu: LevyTriplet, s: float, x: float) -> float:
    """CDF of mu^s at x for scalar s > 0."""
    fam = _require_tag(mu)
    if fam is LawFamily.GAUSSIAN:
        mean, var = mu.law_params
        if math.isinf(x):
            return 1.0 if x > 0 else 0.0
        return float(special.ndtr((x - mean * s) / math.sqrt(var * s)))
    if fam is LawFamily.GAMMA:
        shape, rate = mu.law_params
        if x <= 0:
            return 0.0
        if math.isinf(x):
            return 1.0
        return float(special.gammainc(shape * s, rate * x))
    if fam is LawFamily.POISSON:
        rate, h = mu.law_params
        if h > 0:
            return _poisson_count_cdf(math.floor(x / h) if not math.isinf(x) else x, rate * s)
        # negative jumps: h*K <= x  <=>  K >= x/h
        if math.isinf(x):
            return 1.0 if x > 0 else 0.0
        n = math.ceil(x / h)
        return 1.0 - _poisson_count_cdf(n - 1, rate * s)
    if fam is LawFamily.DELTA:
        (drift,) = mu.law_params
        return 1.0 if drift * s <= x else 0.0
    if fam is LawFamily.SYMMETRIC_STABLE:
        alpha, scale = mu.law_params
        if alpha != 1.0:
            raise UnsupportedFamily(
                "symmetric stable convolution powers implemented for index 1 only"
            )
        if math.isinf(x):
            return 1.0 if x > 0 else 0.0
        return 0.5 + math.atan(x / (scale * s)) / math.pi
    if fam is LawFamily.ONE_SIDED_STABLE:
        alpha, coeff = mu.law_params
        if alpha != 0.5:
            raise UnsupportedFamily(
                "one-sided stable convolution powers implemented for index 1/2 only"
            )
        if x <= 0:
            return 0.0
        if math.isinf(x):
            return 1.0
        c = levy_dist_scale(coeff) * s * s
        return float(special.erfc(math.sqrt(0.5 * c / x)))
    raise UnsupportedFamily(f"no convolution power for {fam}")


def conv_power_interval_mass(mu: LevyTriplet, s: float, lo: float, hi: float) -> float:
    """Mass of mu^s on the half-open interval (lo, hi]."""
    fam = _require_tag(mu)
    if fam is LawFamily.POISSON:
        # Sum atom masses directly so half-open boundaries land on atoms exactly.
        rate, h = mu.law_params
        mean = rate * s
        if h > 0:
            k_lo = math.floor(lo / h) if not math.isinf(lo) else (-INF if lo < 0 else INF)
            k_hi = math.floor(hi / h) if not math.isinf(hi) else (-INF if hi < 0 else INF)
            return _poisson_count_cdf(k_hi, mean) - _poisson_count_cdf(k_lo, mean)
        k_top = math.ceil(lo / h) - 1 if not math.isinf(lo) else (INF if lo < 0 else -INF)
        k_bot = math.ceil(hi / h) if not math.isinf(hi) else (-INF if hi > 0 else INF)
        return _poisson_count_cdf(k_top, mean) - _poisson_count_cdf(k_bot - 1, mean)
    return max(conv_power_cdf(mu, s, hi) - conv_power_cdf(mu, s, lo), 0.0)


def conv_power_set_mass(mu: LevyTriplet, s: float, sets: IntervalSet) -> float:
    return sum(conv_power_interval_mass(mu, s, lo, hi) for lo, hi in sets.intervals)


def conv_power_density(mu: LevyTriplet, s, x):
    """Density of mu^s, vectorized over x (and broadcastable s)."""
    fam = _require_tag(mu)
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    if fam is LawFamily.GAUSSIAN:
        mean, var = mu.law_params
        sd = np.sqrt(var * s)
        z = (x - mean * s) / sd
        return np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))
    if fam is LawFamily.GAMMA:
        shape, rate = mu.law_params
        a = shape * s
        out = np.zeros(np.broadcast_shapes(x.shape, a.shape))
        xb, ab = np.broadcast_arrays(x, a)
        pos = xb > 0
        out[pos] = np.exp(
            ab[pos] * math.log(rate)
            + (ab[pos] - 1.0) * np.log(xb[pos])
            - rate * xb[pos]
            - special.gammaln(ab[pos])
        )
        return out
    if fam is LawFamily.SYMMETRIC_STABLE:
        alpha, scale = mu.law_params
        if alpha != 1.0:
            raise UnsupportedFamily("density implemented for index 1 only")
        c = scale * s
        return c / (math.pi * (x * x + c * c))
    if fam is LawFamily.ONE_SIDED_STABLE:
        alpha, coeff = mu.law_params
        if alpha != 0.5:
            raise UnsupportedFamily("density implemented for index 1/2 only")
        c = levy_dist_scale(coeff) * s * s
        out = np.zeros(np.broadcast_shapes(x.shape, np.shape(c)))
        xb, cb = np.broadcast_arrays(x, c)
        pos = xb > 0
        out[pos] = (
            np.sqrt(cb[pos] / (2.0 * math.pi))
            * xb[pos] ** -1.5
            * np.exp(-0.5 * cb[pos] / xb[pos])
        )
        return out
    raise UnsupportedFamily(f"no closed density for {fam}")


def _gaussian_partial_mean(mean, sd, a, b):
    """E[X 1_{a < X <= b}] for X normal(mean, sd**2)."""
    alpha = (a - mean) / sd
    beta = (b - mean) / sd
    pdf = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    return mean * (special.ndtr(beta) - special.ndtr(alpha)) - sd * (pdf(beta) - pdf(alpha))


def conv_power_truncated_mean(mu: LevyTriplet, s: float) -> float:
    """Integral of x over |x| <= 1 against mu^s."""
    fam = _require_tag(mu)
    if fam is LawFamily.GAUSSIAN:
        mean, var = mu.law_params
        if mean == 0.0:
            return 0.0  # symmetric law: exact cancellation
        return _gaussian_partial_mean(mean * s, math.sqrt(var * s), -1.0, 1.0)
    if fam is LawFamily.GAMMA:
        shape, rate = mu.law_params
        a = shape * s
        return a / rate * float(special.gammainc(a + 1.0, rate))
    if fam is LawFamily.POISSON:
        rate, h = mu.law_params
        mean = rate * s
        k_max = math.floor(1.0 / abs(h))
        ks = np.arange(1, k_max + 1, dtype=float)
        if ks.size == 0:
            return 0.0
        pmf = np.exp(ks * math.log(mean) - mean - special.gammaln(ks + 1.0)) if mean > 0 else 0.0 * ks
        return float(h * np.sum(ks * pmf))
    if fam is LawFamily.DELTA:
        (drift,) = mu.law_params
        x = drift * s
        return x if abs(x) <= 1.0 else 0.0
    if fam is LawFamily.SYMMETRIC_STABLE:
        return 0.0
    if fam is LawFamily.ONE_SIDED_STABLE:
        alpha, coeff = mu.law_params
        if alpha != 0.5:
            raise UnsupportedFamily("implemented for index 1/2 only")
        # int_0^1 x p_c(x) dx = sqrt(2c/pi) e^{-c/2} - c erfc(sqrt(c/2))
        c = levy_dist_scale(coeff) * s * s
        return math.sqrt(2.0 * c / math.pi) * math.exp(-0.5 * c) - c * float(
            special.erfc(math.sqrt(0.5 * c))
        )
    raise UnsupportedFamily(f"no truncated mean for {fam}")


def lemma_constant(mu: LevyTriplet) -> float:
    """Limit of (1/s) integral (1 and x^2) d mu^s as s -> 0."""
    return mu.gaussian_var + mu.jumps.one_wedge(2)


# ---------------------------------------------------------------------------
# Integration of a function against a jump measure on (0, inf).


def _floor_for(rho, dropped_bound, target):
    """Largest floor in a halving sweep with dropped_bound(floor) < target."""
    floor = 1e-8
    for _ in range(960):
        if dropped_bound(floor) < target:
            return floor, dropped_bound(floor)
        floor *= 0.5
    return floor, dropped_bound(floor)


def integrate_rho(rho: LevyMeasure, fn, *, tol=1e-10, linear_bound=None,
                  complex_valued=False):
    """Integral of fn over (0, inf) against rho.

    fn is a scalar function, |fn| <= 1 unless a linear small-s bound
    |fn(s)| <= linear_bound * s is supplied; the bound picks the lower
    truncation for infinite-mass measures.  Returns (value, err, upper).
    """
    fam = rho.family
    if fam is MeasureFamily.ZERO:
        return (0.0j if complex_valued else 0.0), 0.0, 0.0
    if fam is MeasureFamily.FINITE_ATOMIC:
        total = sum(mass * fn(pos) for pos, mass in rho.atoms)
        err = 1e-15 * sum(mass * abs(fn(pos)) for pos, mass in rho.atoms)
        return total, err, rho.atoms[-1][0]
    if fam is MeasureFamily.TABULATED:
        def fvec(xs):
            return np.array([fn(float(v)) for v in np.atleast_1d(xs)])
        value, err = quadrature.integrate_tabulated(fvec, rho.xs, rho.dens)
        if err > max(tol * 1e4, 1e-4 * abs(value)):
            raise QuadratureFailure(f"tabulated mixing grid too coarse: {err:.3e}")
        return (complex(value) if complex_valued else float(value)), err, rho.xs[-1]

    # Density families: truncate both ends with certified bounds, then
    # integrate in u = log s so origin singularities flatten out.
    if linear_bound is not None:
        dropped = lambda f: linear_bound * rho.truncated_moment(1, f)
    else:
        total = rho.total_mass()
        if math.isinf(total):
            raise DomainError(
                "an infinite-mass mixing measure needs a linear small-s bound"
            )
        dropped = lambda f: total - rho.mass_above(f)
    floor, floor_err = _floor_for(rho, dropped, tol * 0.01)

    upper = rho.tail_cutoff(tol * 0.25)
    for _ in range(200):
        if abs(fn(upper)) * rho.mass_above(upper) < tol * 0.25:
            break
        upper *= 1.5
    tail_err = max(abs(fn(upper)), abs(fn(1.5 * upper))) * rho.mass_above(upper)

    def integrand(u):
        s = math.exp(u)
        return fn(s) * float(rho.density(np.array([s]))[0]) * s

    lo_u, hi_u = math.log(floor), math.log(upper)
    if complex_valued:
        value, qerr = quadrature.integrate_complex(integrand, lo_u, hi_u, tol=tol)
    else:
        value, qerr = quadrature.integrate_interval(integrand, lo_u, hi_u, tol=tol)
    return value, qerr + floor_err + tail_err, upper


def rho_quad_nodes(rho: LevyMeasure, *, tol=1e-12, s_floor=None, order=16,
                   max_width=1.0):
    """Nodes and weights so that integral f d rho ~ sum w_i f(s_i).

    Used by the vectorized density mixers; for atoms the nodes are the atoms
    themselves, for densities composite Gauss-Legendre panels in log s.
    """
    fam = rho.family
    if fam is MeasureFamily.ZERO:
        return np.array([]), np.array([])
    if fam is MeasureFamily.FINITE_ATOMIC:
        return rho.positions(), rho.masses()
    if fam is MeasureFamily.TABULATED:
        xs = np.asarray(rho.xs)
        dens = np.asarray(rho.dens)
        # refined trapezoid weights on a 4x midpoint-split grid
        fine = xs
        for _ in range(2):
            mids = 0.5 * (fine[:-1] + fine[1:])
            merged = np.empty(fine.size + mids.size)
            merged[0::2], merged[1::2] = fine, mids
            fine = merged
        d = np.interp(fine, xs, dens)
        w = np.zeros_like(fine)
        dx = np.diff(fine)
        w[:-1] += 0.5 * dx
        w[1:] += 0.5 * dx
        return fine, w * d
    if s_floor is None:
        s_floor = 1e-14
    upper = rho.tail_cutoff(tol)
    edges = quadrature.log_panel_edges(s_floor, upper, max_width=max_width)
    u, wu = quadrature.panel_nodes(edges, order=order)
    s = np.exp(u)
    return s, wu * s * rho.density(s)


# ---------------------------------------------------------------------------
# Public mixing operations.


def check_domain(mu: LevyTriplet, rho: LevyMeasure) -> bool:
    """Whether rho lies in the mixing domain for base law mu."""
    if not rho.is_positive():
        return False
    if mu.is_degenerate():
        return mu.drift != 0.0
    return rho.one_wedge(1) < INF


def _validate_mixing_measure(rho):
    if not rho.is_positive():
        raise DomainError("the mixing measure must live on (0, inf)")
    if rho.one_wedge(1) == INF:
        raise DomainError("the mixing measure must integrate (1 and s)")


def _delta_pushforward_mass(drift, rho, sets):
    """Mass of rho(drift^-1 dx) over the interval set; exact."""
    total = 0.0
    for lo, hi in sets.intervals:
        a, b = lo / drift, hi / drift
        if rho.family is MeasureFamily.FINITE_ATOMIC:
            if drift > 0:
                total += sum(m for p, m in rho.atoms if a < p <= b)
            else:
                total += sum(m for p, m in rho.atoms if b <= p < a)
        else:
            total += rho.interval_mass(min(a, b), max(a, b))
    return MixResult(total, 1e-15 * total, rho.tail_cutoff(1e-15))


def phi_mix_mass(mu: LevyTriplet, rho: LevyMeasure, sets: IntervalSet,
                 *, tol=1e-10) -> MixResult:
    """Interval masses of the mixed measure integral mu^s(.) rho(ds)."""
    if not rho.is_positive():
        raise DomainError("the mixing measure must live on (0, inf)")
    if mu.law_family is LawFamily.DELTA:
        # Degenerate base: the mix is a pushforward, defined for any
        # positive jump measure as long as the point is not 0.
        if mu.law_params[0] == 0.0:
            raise DomainError("a degenerate base at 0 is outside the mixing domain")
        return _delta_pushforward_mass(mu.law_params[0], rho, sets)
    if rho.one_wedge(1) == INF:
        raise DomainError("the mixing measure must integrate (1 and s)")
    d = sets.distance_from_zero
    if d <= 0.0 and math.isinf(rho.total_mass()):
        raise DomainError(
            "interval sets touching 0 need a finite mixing measure"
        )
    fn = lambda s: conv_power_set_mass(mu, s, sets)
    bound = None
    if d > 0.0:
        bound = 2.0 * lemma_constant(mu) / min(1.0, d * d)
    value, err, upper = integrate_rho(rho, fn, tol=tol, linear_bound=bound)
    return MixResult(max(value, 0.0), err, upper)


def phi_mix_density_gamma(rate: float, rho: LevyMeasure, x: float,
                          *, tol=1e-10) -> float:
    """Pointwise density of the gamma-kernel mixed measure at x >= 0.

    The kernel is the gamma convolution-power family with the given rate;
    the value at 0 is defined to be 0.
    """
    if rate <= 0:
        raise DomainError("rate must be > 0")
    if x < 0:
        raise DomainError("the mixed density lives on [0, inf)")
    if x == 0.0:
        return 0.0
    _validate_mixing_measure(rho)
    log_rx = math.log(rate * x)

    def fn(s):
        return math.exp(s * log_rx - math.lgamma(s))

    # 1/Gamma(s) ~ s near 0, so |fn| <= 1.2 s for floors below 1e-8.
    value, err, _ = integrate_rho(rho, fn, tol=tol, linear_bound=1.2)
    if err > max(1e-7, 1e-6 * abs(value)):
        raise QuadratureFailure(f"mixed density error estimate {err:.3e} too large")
    return math.exp(-rate * x) / x * value


def _stable_reference_cdf(mu: LevyTriplet, alpha: float):
    """Reference CDF of the strictly stable base law, plus validation."""
    fam = _require_tag(mu)
    if fam is LawFamily.GAUSSIAN:
        mean, var = mu.law_params
        if alpha != 2.0:
            raise DomainError("a gaussian base is 2-stable")
        if mean != 0.0:
            raise DomainError("strict 2-stability needs mean 0")
        sd = math.sqrt(var)
        return lambda x: float(special.ndtr(x / sd))
    if fam is LawFamily.SYMMETRIC_STABLE:
        index, scale = mu.law_params
        if alpha != index:
            raise DomainError(f"base law has stability index {index}, not {alpha}")
        if index != 1.0:
            raise UnsupportedFamily("symmetric stable reference CDF needs index 1")
        return lambda x: 0.5 + math.atan(x / scale) / math.pi
    if fam is LawFamily.ONE_SIDED_STABLE:
        index, coeff = mu.law_params
        if alpha != index:
            raise DomainError(f"base law has stability index {index}, not {alpha}")
        if index != 0.5:
            raise UnsupportedFamily("one-sided stable reference CDF needs index 1/2")
        c = levy_dist_scale(coeff)
        return lambda x: float(special.erfc(math.sqrt(0.5 * c / x))) if x > 0 else 0.0
    raise UnsupportedFamily(f"{fam} is not a supported strictly stable base")


def _image_in_ml1(rho: LevyMeasure, alpha: float) -> bool:
    """Whether the image of rho under s -> s**(1/alpha) integrates (1 and t)."""
    if rho.total_mass() < INF:
        return True
    if rho.family is MeasureFamily.GAMMA:
        return True
    if rho.family is MeasureFamily.ONE_SIDED_STABLE:
        return rho.index < 1.0 / alpha
    if rho.family is MeasureFamily.SYMMETRIC_STABLE:
        return False
    return rho.one_wedge(1) < INF


@dataclass(frozen=True)
class StableMixEvaluator:
    """Interval masses of the mix with a strictly stable base law.

    Uses the scaling identity: mu^s(A) is mu evaluated on s**(-1/alpha) A, so
    the mix is a multiplicative smearing of the pushforward of rho under
    s -> s**(1/alpha) against one reference CDF; no per-s convolution powers.
    """

    mu: LevyTriplet
    alpha: float
    rho: LevyMeasure

    def mass(self, sets: IntervalSet, *, tol=1e-10) -> MixResult:
        cdf = _stable_reference_cdf(self.mu, self.alpha)
        d = sets.distance_from_zero
        if d <= 0.0 and math.isinf(self.rho.total_mass()):
            raise DomainError("interval sets touching 0 need a finite mixing measure")
        inv = 1.0 / self.alpha

        def fn(s):
            scale = s**-inv
            total = 0.0
            for lo, hi in sets.intervals:
                b = 1.0 if math.isinf(hi) else cdf(hi * scale)
                a = 0.0 if math.isinf(lo) else cdf(lo * scale)
                total += max(b - a, 0.0)
            return total

        bound = None
        if d > 0.0:
            bound = 2.0 * lemma_constant(self.mu) / min(1.0, d * d)
        value, err, upper = integrate_rho(self.rho, fn, tol=tol, linear_bound=bound)
        return MixResult(max(value, 0.0), err, upper)


def phi_mix_stable(mu: LevyTriplet, alpha: float, rho: LevyMeasure) -> StableMixEvaluator:
    """Evaluator for mixing a strictly alpha-stable base law with rho."""
    _stable_reference_cdf(mu, alpha)  # validates base and alpha
    if not rho.is_positive():
        raise DomainError("the mixing measure must live on (0, inf)")
    if rho.one_wedge(1) == INF:
        raise DomainError("the mixing measure must integrate (1 and s)")
    if not _image_in_ml1(rho, alpha):
        raise DomainError(
            "the image of rho under s -> s**(1/alpha) must integrate (1 and t)"
        )
    return StableMixEvaluator(mu, alpha, rho)


def mixing_cf(mu: LevyTriplet, rho: LevyMeasure, theta: float, *, tol=1e-10) -> complex:
    """Characteristic transform of the mixed measure for finite rho.

    Equals the integral of exp(s * log_cf_mu(theta)) rho(ds); this identity
    needs rho to have finite total mass.
    """
    if not rho.is_positive():
        raise DomainError("the mixing measure must live on (0, inf)")
    if math.isinf(rho.total_mass()):
        raise DomainError("the transform identity needs a finite mixing measure")
    phi = char_exponent(mu, theta)
    fn = lambda s: cmath.exp(s * phi)
    value, err, _ = integrate_rho(rho, fn, tol=tol, complex_valued=True)
    if err > 1e-6 * max(1.0, abs(value)):
        raise QuadratureFailure(f"mixing transform error estimate {err:.3e}")
    return value


def small_s_ratio(mu: LevyTriplet, s: float) -> float:
    """(1/s) integral (1 and x^2) d mu^s; tends to the lemma constant."""
    if s <= 0:
        raise DomainError("s must be > 0")
    if mu.is_degenerate():
        raise DomainError("the base law must be non-degenerate")
    fam = _require_tag(mu)
    if fam is LawFamily.GAUSSIAN:
        mean, var = mu.law_params
        m, sd = mean * s, math.sqrt(var * s)
        alpha, beta = (-1.0 - m) / sd, (1.0 - m) / sd
        npdf = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
        gap = float(special.ndtr(beta) - special.ndtr(alpha))
        inside_sq = (
            (m * m + sd * sd) * gap
            + 2.0 * m * sd * (npdf(alpha) - npdf(beta))
            + sd * sd * (alpha * npdf(alpha) - beta * npdf(beta))
        )
        tails = 1.0 - gap
        return (inside_sq + tails) / s
    if fam is LawFamily.GAMMA:
        shape, rate = mu.law_params
        a = shape * s
        inside = a * (a + 1.0) / rate**2 * float(special.gammainc(a + 2.0, rate))
        tail = 1.0 - float(special.gammainc(a, rate))
        return (inside + tail) / s
    if fam is LawFamily.POISSON:
        rate, h = mu.law_params
        mean = rate * s
        k1 = math.floor(1.0 / abs(h))
        ks = np.arange(1, k1 + 1, dtype=float)
        inside = 0.0
        if ks.size and mean > 0:
            pmf = np.exp(ks * math.log(mean) - mean - special.gammaln(ks + 1.0))
            inside = float(np.sum((h * ks) ** 2 * pmf))
        tail = 1.0 - _poisson_count_cdf(k1, mean)
        return (inside + tail) / s
    if fam is LawFamily.SYMMETRIC_STABLE:
        index, scale = mu.law_params
        if index != 1.0:
            raise UnsupportedFamily("implemented for index 1 only")
        c = scale * s
        inside = (c / math.pi) * (1.0 - c * math.atan(1.0 / c))
        tail = 0.5 - math.atan(1.0 / c) / math.pi
        return 2.0 * (inside + tail) / s
    if fam is LawFamily.ONE_SIDED_STABLE:
        index, coeff = mu.law_params
        if index != 0.5:
            raise UnsupportedFamily("implemented for index 1/2 only")
        c = levy_dist_scale(coeff) * s * s
        inside, _ = quadrature.integrate_interval(
            lambda x: x * x * math.sqrt(c / (2 * math.pi)) * x**-1.5
            * math.exp(-0.5 * c / x),
            0.0, 1.0, tol=1e-14,
        )
        tail = float(special.erf(math.sqrt(0.5 * c)))
        return (inside + tail) / s
    raise UnsupportedFamily(f"no small-s ratio for {fam}")
