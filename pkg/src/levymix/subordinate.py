"""Triplet and characteristic-exponent maps for subordinated laws.

Two independent evaluation routes are kept deliberately separate: composing
the base log-CF with the time-change Laplace exponent, and assembling the
subordinated triplet and pushing it through its own jump-integral
quadrature.  Tests compare the two; nothing here shares intermediate
results between them.
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
    SubordinatorPair,
    TruncationConvention,
    ZERO_MEASURE,
    char_exponent,
    laplace_exponent,
    levy_dist_scale,
)
from .errors import DomainError, QuadratureFailure, UnsupportedFamily
from .mixing import (
    IntervalSet,
    MixResult,
    check_domain,
    conv_power_density,
    conv_power_truncated_mean,
    integrate_rho,
    lemma_constant,
    phi_mix_mass,
    rho_quad_nodes,
)

_X_FLOOR = 1e-9
_S_FLOOR = 1e-14


def compose_cf(base: LevyTriplet, pair: SubordinatorPair, theta: float) -> complex:
    """Log-CF of the subordinated law: time-change exponent of the base exponent."""
    return laplace_exponent(pair, char_exponent(base, theta))


def _grid_sides(fam: LawFamily):
    if fam in (LawFamily.GAMMA, LawFamily.ONE_SIDED_STABLE):
        return (1,)
    if fam in (LawFamily.GAUSSIAN, LawFamily.SYMMETRIC_STABLE):
        return (-1, 1)
    raise UnsupportedFamily(f"no density grid for base family {fam}")


def _survival_vec(base: LevyTriplet, s, x: float, side: int):
    """Per-s tail mass of mu^s beyond x on the given side, vectorized in s."""
    fam = base.law_family
    s = np.asarray(s, dtype=float)
    if fam is LawFamily.GAUSSIAN:
        mean, var = base.law_params
        sd = np.sqrt(var * s)
        if side > 0:
            return special.ndtr((mean * s - x) / sd)
        return special.ndtr((-x - mean * s) / sd)
    if fam is LawFamily.GAMMA:
        shape, rate = base.law_params
        return special.gammaincc(shape * s, rate * x)
    if fam is LawFamily.SYMMETRIC_STABLE:
        _, scale = base.law_params
        return 0.5 - np.arctan(x / (scale * s)) / math.pi
    if fam is LawFamily.ONE_SIDED_STABLE:
        _, coeff = base.law_params
        c = levy_dist_scale(coeff) * s * s
        return special.erf(np.sqrt(0.5 * c / x))
    raise UnsupportedFamily(f"no tail formula for {fam}")


def _char_weights(theta: float, xs: np.ndarray) -> np.ndarray:
    """exp(i theta x) - 1 - i theta tau(x) with the standard truncation."""
    out = np.exp(1j * theta * xs) - 1.0
    inside = np.abs(xs) <= 1.0
    out[inside] -= 1j * theta * xs[inside]
    return out


_HEAVY_TAIL = (LawFamily.SYMMETRIC_STABLE, LawFamily.ONE_SIDED_STABLE)


def _density_derivs(base: LevyTriplet, s, x: float):
    """(p, p', p'') of mu^s at x > 0, vectorized over s; heavy families only."""
    fam = base.law_family
    s = np.asarray(s, dtype=float)
    if fam is LawFamily.SYMMETRIC_STABLE:
        c = base.law_params[1] * s
        denom = x * x + c * c
        p = c / (math.pi * denom)
        p1 = -2.0 * x * c / (math.pi * denom**2)
        p2 = c * (6.0 * x * x - 2.0 * c * c) / (math.pi * denom**3)
        return p, p1, p2
    if fam is LawFamily.ONE_SIDED_STABLE:
        c = levy_dist_scale(base.law_params[1]) * s * s
        p = np.sqrt(c / (2.0 * math.pi)) * x**-1.5 * np.exp(-0.5 * c / x)
        g = -1.5 / x + 0.5 * c / (x * x)
        p1 = p * g
        p2 = p * (g * g + 1.5 / (x * x) - c / x**3)
        return p, p1, p2
    raise UnsupportedFamily(f"no tail expansion for {fam}")


def _tail_correction(theta: float, x_hi: float, mass: float, f0: float,
                     f1: float, f2: float) -> complex:
    """Integral of (e^{i theta x} - 1) over (x_hi, inf) by parts, 3 terms."""
    if theta == 0.0:
        return 0.0 + 0.0j
    it = 1j * theta
    osc = cmath.exp(it * x_hi) * (-f0 / it + f1 / it**2 - f2 / it**3)
    return -mass + osc


class JumpMixEvaluator:
    """Jump measure of a subordinated law: beta0 * nu plus the mixed part.

    Interval masses are evaluated on demand; the Levy-Khintchine jump
    integral is evaluated through a cached x-grid representation of the
    mixed density (or exact atom/pushforward sums where the mix is
    discrete), entirely independent of exponent composition.
    """

    def __init__(self, base: LevyTriplet, pair: SubordinatorPair):
        self.base = base
        self.pair = pair
        self.drift_part = (
            base.jumps.scaled(pair.drift) if pair.drift != 0.0 else ZERO_MEASURE
        )
        rho = pair.jumps
        if rho.is_zero():
            self._mode = "zero"
        elif base.law_family is LawFamily.DELTA:
            self._mode = "pushforward"
        elif base.law_family is LawFamily.POISSON:
            self._mode = "atomic"
            self._atoms = None
        elif base.law_family in (
            LawFamily.GAUSSIAN,
            LawFamily.GAMMA,
            LawFamily.SYMMETRIC_STABLE,
            LawFamily.ONE_SIDED_STABLE,
        ):
            _grid_sides(base.law_family)  # raises early for unsupported indexes
            self._mode = "grid"
            self._grid_cache = None
        elif base.law_family is None:
            raise UnsupportedFamily(
                "mixing the jump measure needs a law-tagged base triplet"
            )
        else:
            raise UnsupportedFamily(
                f"no mixed-jump representation for base family {base.law_family}"
            )

    # -- interval masses ---------------------------------------------------

    def mix_mass(self, sets: IntervalSet, *, tol=1e-10) -> MixResult:
        if self._mode == "zero":
            return MixResult(0.0, 0.0, 0.0)
        return phi_mix_mass(self.base, self.pair.jumps, sets, tol=tol)

    def mass(self, sets: IntervalSet, *, tol=1e-10) -> MixResult:
        mix = self.mix_mass(sets, tol=tol)
        drift = sum(self.drift_part.interval_mass(lo, hi) for lo, hi in sets.intervals)
        return MixResult(drift + mix.value, mix.abs_error_estimate, mix.truncation_point)

    # -- Levy-Khintchine jump integral -------------------------------------

    def char_integral(self, theta: float) -> complex:
        base_part = 0.0 + 0.0j
        if not self.drift_part.is_zero():
            carrier = LevyTriplet(0.0, 0.0, self.drift_part)
            base_part = char_exponent(carrier, theta)
        if self._mode == "zero" or theta == 0.0:
            return base_part
        if self._mode == "pushforward":
            return base_part + self._pushforward_integral(theta)
        if self._mode == "atomic":
            positions, masses = self._poisson_atoms()
            g = _char_weights(theta, positions)
            return base_part + complex(np.dot(masses, g))
        xs, wx, dens, tail = self._grid(abs(theta))
        g = _char_weights(theta, xs)
        value = base_part + complex(np.dot(wx * dens, g))
        if tail is not None:
            x_hi, mass, f0, f1, f2, sides = tail
            value += _tail_correction(theta, x_hi, mass, f0, f1, f2)
            if sides == 2:
                value += _tail_correction(-theta, x_hi, mass, f0, f1, f2)
        return value

    def _pushforward_integral(self, theta: float) -> complex:
        speed = self.base.law_params[0]
        rho = self.pair.jumps

        def fn(s):
            u = theta * speed * s
            tau = speed * s if abs(speed * s) <= 1.0 else 0.0
            return cmath.exp(1j * u) - 1.0 - 1j * theta * tau

        bound = 0.5 * (theta * speed) ** 2 + abs(theta * speed)
        value, _, _ = integrate_rho(rho, fn, tol=1e-12, linear_bound=bound,
                                    complex_valued=True)
        return value

    def _poisson_atoms(self):
        if self._atoms is not None:
            return self._atoms
        rate, h = self.base.law_params
        rho = self.pair.jumps
        upper = rho.tail_cutoff(1e-16)
        mean_cap = rate * upper
        k_max = int(max(20, math.ceil(mean_cap + 12.0 * math.sqrt(mean_cap) + 30)))
        masses = []
        for k in range(1, k_max + 1):
            lg = math.lgamma(k + 1.0)
            fn = lambda s: math.exp(k * math.log(rate * s) - rate * s - lg)
            # pmf(k, rate*s) <= rate*s for rate*s <= 1, the floor-search region
            m, _, _ = integrate_rho(rho, fn, tol=1e-14, linear_bound=rate)
            masses.append(m)
            if k > mean_cap + 3 and masses[-1] < 1e-18 and masses[-2] < 1e-18:
                break
        ks = np.arange(1, len(masses) + 1, dtype=float)
        self._atoms = (h * ks, np.asarray(masses))
        return self._atoms

    def _cut_point(self, theta_min: float, s_nodes, s_weights):
        """Upper truncation of the resolved x-grid, or a tail-corrected cut."""
        heavy = self.base.law_family in _HEAVY_TAIL
        if heavy:
            # Heavy power tails: resolve out to where a 3-term integration-by-
            # parts expansion of the remaining oscillatory tail is certified.
            x_hi = max(1200.0, 40.0 / theta_min)
            if x_hi > 1e6:
                raise QuadratureFailure(
                    f"theta = {theta_min:.3e} too close to 0 for a heavy-tailed base"
                )
            return x_hi, True
        x_hi = 2.0
        for _ in range(200):
            tail = float(
                np.dot(s_weights, _survival_vec(self.base, s_nodes, x_hi, 1))
            )
            if tail < 1e-14:
                return x_hi, False
            x_hi *= 1.5
        raise QuadratureFailure("mixed density tail does not decay")

    def _x_panels(self, side: int, theta_max: float, x_hi: float):
        # (0, 1]: panels in log x; integrating in u = log x adds a factor x.
        u_nodes, u_w = quadrature.panel_nodes(
            quadrature.log_panel_edges(_X_FLOOR, 1.0, max_width=0.7), order=16
        )
        xs_log = np.exp(u_nodes)
        w_log = u_w * xs_log
        # (1, x_hi]: linear panels narrow enough for the target oscillation.
        width = min(0.5, 8.0 / max(theta_max, 1e-9))
        n_lin = int(math.ceil((x_hi - 1.0) / width))
        xs_lin, w_lin = quadrature.panel_nodes(
            np.linspace(1.0, x_hi, n_lin + 1), order=16
        )
        xs = np.concatenate([xs_log, xs_lin])
        wx = np.concatenate([w_log, w_lin])
        if side < 0:
            return -xs, wx
        return xs, wx

    def _mixed_density(self, xs: np.ndarray, s_nodes, s_weights) -> np.ndarray:
        out = np.zeros(xs.size)
        block = max(1, int(2e6 // max(xs.size, 1)) or 1)
        for k in range(0, s_nodes.size, block):
            sl = slice(k, k + block)
            m = conv_power_density(self.base, s_nodes[None, sl], xs[:, None])
            out += m @ s_weights[sl]
        return out

    def _grid(self, theta_abs: float):
        theta_min = max(theta_abs, 1e-12)
        if self._grid_cache is not None:
            t_max, t_min = self._grid_cache[0], self._grid_cache[1]
            if theta_abs <= t_max and theta_min >= t_min:
                return self._grid_cache[2:]
        theta_max = max(12.0, 2.0 * theta_abs)
        theta_min = min(theta_min, 0.05)
        s_nodes, s_weights = rho_quad_nodes(
            self.pair.jumps, tol=1e-12, s_floor=_S_FLOOR
        )
        x_hi, heavy = self._cut_point(theta_min, s_nodes, s_weights)
        sides = _grid_sides(self.base.law_family)
        xs_all, wx_all = [], []
        for side in sides:
            xs, wx = self._x_panels(side, theta_max, x_hi)
            xs_all.append(xs)
            wx_all.append(wx)
        xs = np.concatenate(xs_all)
        wx = np.concatenate(wx_all)
        dens = self._mixed_density(xs, s_nodes, s_weights)
        tail = None
        if heavy:
            mass = float(
                np.dot(s_weights, _survival_vec(self.base, s_nodes, x_hi, 1))
            )
            p, p1, p2 = _density_derivs(self.base, s_nodes, x_hi)
            tail = (
                x_hi,
                mass,
                float(np.dot(s_weights, p)),
                float(np.dot(s_weights, p1)),
                float(np.dot(s_weights, p2)),
                len(sides),
            )
        self._grid_cache = (theta_max, theta_min if heavy else 0.0, xs, wx, dens, tail)
        return xs, wx, dens, tail


@dataclass(frozen=True)
class SubordinatedTriplet:
    """Characteristic triplet of the subordinated law, standard truncation."""

    gamma_bar: float
    b_bar: float
    jumps: JumpMixEvaluator
    base: LevyTriplet
    pair: SubordinatorPair


def _mixing_drift_term(base: LevyTriplet, pair: SubordinatorPair) -> float:
    """Integral over rho of the truncated mean of mu^s."""
    fam = base.law_family
    if fam is LawFamily.SYMMETRIC_STABLE:
        return 0.0
    if fam is LawFamily.GAUSSIAN and base.law_params[0] == 0.0:
        return 0.0  # symmetric base: the inner integral vanishes identically
    fn = lambda s: conv_power_truncated_mean(base, s)
    bound = 1.0 + 2.0 * (abs(base.drift) + lemma_constant(base))
    value, err, _ = integrate_rho(pair.jumps, fn, tol=1e-12, linear_bound=bound)
    if err > 1e-6 * max(1.0, abs(value)):
        raise QuadratureFailure(f"drift mixing integral error estimate {err:.3e}")
    return value


def subordinate_triplet(base: LevyTriplet, pair: SubordinatorPair) -> SubordinatedTriplet:
    """Characteristic triplet of the base process run on the subordinator clock."""
    if base.convention is not TruncationConvention.STANDARD:
        raise DomainError("the base triplet must use the standard truncation")
    b_bar = base.gaussian_var * pair.drift
    if pair.jumps.is_zero():
        return SubordinatedTriplet(
            base.drift * pair.drift, b_bar, JumpMixEvaluator(base, pair), base, pair
        )
    if base.law_family is None:
        raise UnsupportedFamily(
            "subordinating with jumps needs a law-tagged base triplet"
        )
    if not check_domain(base, pair.jumps):
        raise DomainError("the pair's jump measure is outside the mixing domain")
    gamma_bar = base.drift * pair.drift + _mixing_drift_term(base, pair)
    return SubordinatedTriplet(gamma_bar, b_bar, JumpMixEvaluator(base, pair), base, pair)


def cf_from_triplet(st: SubordinatedTriplet, theta: float) -> complex:
    """Log-CF reassembled from the subordinated triplet's own pieces."""
    value = 1j * theta * st.gamma_bar - 0.5 * st.b_bar * theta * theta
    return value + st.jumps.char_integral(theta)


# ---------------------------------------------------------------------------
# Piecewise-constant seed fields on rectangles.


@dataclass(frozen=True)
class SeedCell:
    """Axis-aligned half-open box with one subordinator seed and a weight."""

    rect: tuple  # ((lo, hi),) in 1-D or ((lo, hi), (lo, hi)) in 2-D
    pair: SubordinatorPair
    weight: float = 1.0

    def __post_init__(self):
        rect = tuple((float(lo), float(hi)) for lo, hi in self.rect)
        if len(rect) not in (1, 2):
            raise DomainError("cells live in dimension 1 or 2")
        for lo, hi in rect:
            if not hi > lo:
                raise DomainError(f"degenerate cell edge ({lo}, {hi})")
        if not self.weight > 0:
            raise DomainError("cell weight must be > 0")
        object.__setattr__(self, "rect", rect)

    @property
    def volume(self) -> float:
        v = 1.0
        for lo, hi in self.rect:
            v *= hi - lo
        return v

    @property
    def control_mass(self) -> float:
        return self.weight * self.volume

    def overlaps(self, other: "SeedCell") -> bool:
        if len(self.rect) != len(other.rect):
            return False
        return all(
            lo1 < hi2 and lo2 < hi1
            for (lo1, hi1), (lo2, hi2) in zip(self.rect, other.rect)
        )


@dataclass(frozen=True)
class SeedField:
    cells: tuple

    def __post_init__(self):
        cells = tuple(self.cells)
        if not cells:
            raise DomainError("a seed field needs at least one cell")
        dims = {len(c.rect) for c in cells}
        if len(dims) != 1:
            raise DomainError("all cells must share one dimension")
        for i, a in enumerate(cells):
            for b in cells[i + 1:]:
                if a.overlaps(b):
                    raise DomainError("cell rectangles must be disjoint")
        object.__setattr__(self, "cells", cells)


def basis_quadruplet(base: LevyTriplet, fld: SeedField):
    """Per-cell subordinated triplets; the control weights pass through."""
    return [subordinate_triplet(base, cell.pair) for cell in fld.cells]


def cell_log_cf(base: LevyTriplet, cell: SeedCell, theta: float) -> complex:
    """Log-CF of the basis value on one cell: control mass times the seed exponent."""
    return cell.control_mass * compose_cf(base, cell.pair, theta)
