"""Monte Carlo sampling of subordinators, Levy paths, time-changed paths,
cell fields driven by a positive random measure, and kernel-smoothed
moving-average paths.

Every sampler is deterministic given (seed, stream_id): each stream gets its
own counter-based generator, so path ensembles are reproducible regardless of
evaluation order or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    AtomicMeasure,
    CompoundExponentialMeasure,
    GammaMeasure,
    LawFamily,
    LevyMeasure,
    LevyTriplet,
    OneSidedStableMeasure,
    SubordinatorPair,
    SymmetricStableMeasure,
    levy_dist_scale,
)
from .errors import ConfigError, DomainError, UnsupportedFamily
from .subordinate import SeedField

__all__ = [
    "SmallJumpMode",
    "TimeGrid",
    "SimConfig",
    "PathSample",
    "GridField",
    "LssKernel",
    "exp_kernel",
    "gamma_kernel",
    "make_rng",
    "conv_power_sample",
    "sample_subordinator",
    "sample_levy",
    "sample_subordinated",
    "sample_basis_grid",
    "sample_basis_ensemble",
    "sample_lss",
]

_MASK64 = (1 << 64) - 1


class SmallJumpMode(Enum):
    DRIFT_ONLY = "drift_only"
    GAUSSIAN_SUBSTITUTE = "gaussian_substitute"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t0 + k*dt, k = 0..n_steps."""

    t0: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("dt must be positive and finite")
        if self.n_steps < 1 or self.n_steps != int(self.n_steps):
            raise ConfigError("n_steps must be a positive integer")

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    def horizon(self) -> float:
        return self.dt * self.n_steps


@dataclass(frozen=True)
class SimConfig:
    """Sampling controls.

    epsilon=None picks the jump-truncation level per run so the dropped
    small-jump mean is below 1e-6 * horizon; explicit values must be > 0.
    The truncation only matters for measures without an exact sampler.
    """

    epsilon: float | None = None
    seed: int = 0
    n_paths: int = 1
    small_jump_mode: SmallJumpMode = SmallJumpMode.DRIFT_ONLY

    def __post_init__(self):
        if self.epsilon is not None and not (self.epsilon > 0):
            raise ConfigError("epsilon must be > 0")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")


@dataclass(frozen=True)
class PathSample:
    grid: TimeGrid
    values: np.ndarray
    seed: int
    stream_id: int

    def increments(self) -> np.ndarray:
        return np.diff(self.values)


@dataclass(frozen=True)
class GridField:
    """Sampled cell values (rect, area, value) plus stored union cells.

    Each stored union records member indices and a value computed by exact
    summation, so additivity over stored unions holds to the last bit.
    """

    cells: tuple
    seed: int
    unions: tuple = ()

    def cell_values(self) -> np.ndarray:
        return np.array([value for _, _, value in self.cells])

    def with_union(self, indices) -> "GridField":
        idx = tuple(int(i) for i in indices)
        if len(set(idx)) != len(idx) or not idx:
            raise ConfigError("union indices must be distinct and nonempty")
        total = sum(self.cells[i][2] for i in idx)
        return GridField(self.cells, self.seed, self.unions + ((idx, total),))


def make_rng(seed: int, stream_id: int = 0, channel: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream, channel)."""
    key = [seed & _MASK64, ((stream_id & _MASK64) << 16 | (channel & 0xFFFF)) & _MASK64]
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# Exact convolution-power sampling of the tagged time-one laws.


def _standard_symmetric_stable(rng, alpha: float, size: int) -> np.ndarray:
    # Chambers-Mallows-Stuck; log-CF -|theta|**alpha.
    v = math.pi * (rng.random(size) - 0.5)
    if alpha == 1.0:
        return np.tan(v)
    w = rng.exponential(1.0, size)
    return (
        np.sin(alpha * v)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
    )


def _levy_positive(rng, c, size: int) -> np.ndarray:
    # One-sided 1/2-stable with density sqrt(c/2 pi) x^-3/2 e^{-c/2x}: c / Z^2.
    z = rng.standard_normal(size)
    while True:
        bad = z == 0.0
        if not bad.any():
            break
        z[bad] = rng.standard_normal(int(bad.sum()))
    return np.asarray(c) / (z * z)


def conv_power_sample(mu: LevyTriplet, r, rng) -> np.ndarray:
    """One draw from mu^r for each entry of r (r >= 0)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("convolution powers need r >= 0")
    fam = mu.law_family
    if fam is None:
        raise UnsupportedFamily("no closed-form power sampler for an untagged law")
    if fam is LawFamily.GAUSSIAN:
        mean, var = mu.law_params
        return mean * r + np.sqrt(var * r) * rng.standard_normal(r.shape)
    if fam is LawFamily.GAMMA:
        shape, rate = mu.law_params
        return rng.gamma(shape * r, 1.0 / rate)
    if fam is LawFamily.POISSON:
        rate, h = mu.law_params
        return h * rng.poisson(rate * r)
    if fam is LawFamily.DELTA:
        (drift,) = mu.law_params
        return drift * r
    if fam is LawFamily.SYMMETRIC_STABLE:
        alpha, scale = mu.law_params
        return scale * r ** (1.0 / alpha) * _standard_symmetric_stable(rng, alpha, r.shape)
    if fam is LawFamily.ONE_SIDED_STABLE:
        alpha, coeff = mu.law_params
        if alpha != 0.5:
            raise UnsupportedFamily("exact power sampling needs index 1/2")
        return _levy_positive(rng, levy_dist_scale(coeff) * r * r, r.shape)
    raise UnsupportedFamily(f"no power sampler for {fam}")


# ---------------------------------------------------------------------------
# Subordinator increments.


def _auto_epsilon(measure: LevyMeasure, horizon: float) -> float:
    budget = 1e-6 * max(horizon, 1e-12)
    eps = 1.0
    for _ in range(4000):
        small = abs(measure.truncated_moment(1, eps)) + measure.truncated_moment(2, eps) / max(eps, 1e-300)
        if small < budget:
            return eps
        eps *= 0.5
    raise ConfigError("could not find a truncation level meeting the error budget")


def _compound_poisson_increments(measure, dt, n, eps, rng) -> np.ndarray:
    """Sum of jumps above eps per step, one step per output entry."""
    lam = measure.mass_above(eps)
    if lam == 0.0:
        if measure.tail_cutoff(1e-300) <= eps or measure.is_zero():
            raise ConfigError(f"epsilon={eps} is at or above the jump support")
        return np.zeros(n)
    counts = rng.poisson(lam * dt, n)
    total = int(counts.sum())
    out = np.zeros(n)
    if total:
        jumps = measure.sample_tail(rng, eps, total)
        bounds = np.concatenate(([0], np.cumsum(counts)))
        out = np.add.reduceat(np.concatenate((jumps, [0.0])), bounds[:-1])
        out[counts == 0] = 0.0
    return out


def _truncated_subordinator_increments(pair, dt, n, eps, rng) -> np.ndarray:
    # Drift + jumps above eps + exact mean of the dropped small jumps.
    comp = pair.jumps.truncated_moment(1, eps)
    inc = _compound_poisson_increments(pair.jumps, dt, n, eps, rng)
    return inc + (pair.drift + comp) * dt


def _subordinator_increments(pair: SubordinatorPair, dt: float, n: int, cfg: SimConfig, rng) -> np.ndarray:
    """n independent increments of the subordinator over steps of length dt.

    Exact for gamma, one-sided 1/2-stable, atomic, and compound-exponential
    jump parts; anything else gets the epsilon-truncation with the dropped
    mean folded into the drift (always nonnegative, so paths stay monotone).
    """
    rho = pair.jumps
    base = pair.drift * dt * np.ones(n)
    if rho.is_zero():
        return base
    if isinstance(rho, GammaMeasure):
        return base + rng.gamma(rho.shape * dt, 1.0 / rho.rate, n)
    if isinstance(rho, OneSidedStableMeasure) and rho.index == 0.5:
        return base + _levy_positive(rng, levy_dist_scale(rho.coeff * dt), n)
    if isinstance(rho, AtomicMeasure):
        for pos, mass in rho.atoms:
            base = base + pos * rng.poisson(mass * dt, n)
        return base
    if isinstance(rho, CompoundExponentialMeasure):
        counts = rng.poisson(rho.rate * dt, n)
        inc = np.zeros(n)
        busy = counts > 0
        if busy.any():
            inc[busy] = rng.gamma(counts[busy].astype(float), 1.0 / rho.jump_rate)
        return base + inc
    eps = cfg.epsilon if cfg.epsilon is not None else _auto_epsilon(rho, dt * n)
    return _truncated_subordinator_increments(pair, dt, n, eps, rng)


def _paths_from_increments(draw, grid: TimeGrid, cfg: SimConfig):
    out = []
    for stream in range(cfg.n_paths):
        inc = draw(stream)
        values = np.concatenate(([0.0], np.cumsum(inc)))
        out.append(PathSample(grid, values, cfg.seed, stream))
    return out[0] if cfg.n_paths == 1 else out


def sample_subordinator(pair: SubordinatorPair, grid: TimeGrid, cfg: SimConfig = SimConfig()):
    """Nondecreasing path(s) of the subordinator on the grid, started at 0."""

    def draw(stream):
        rng = make_rng(cfg.seed, stream, channel=0)
        return _subordinator_increments(pair, grid.dt, grid.n_steps, cfg, rng)

    return _paths_from_increments(draw, grid, cfg)


# ---------------------------------------------------------------------------
# Levy paths.


def _levy_increments(t: LevyTriplet, dt: float, n: int, cfg: SimConfig, rng) -> np.ndarray:
    nu = t.jumps
    inc = t.drift * dt * np.ones(n)
    if t.gaussian_var > 0:
        inc += math.sqrt(t.gaussian_var * dt) * rng.standard_normal(n)
    if nu.is_zero():
        return inc
    if isinstance(nu, SymmetricStableMeasure):
        # Symmetric jumps compensate to zero shift regardless of index.
        alpha = nu.index
        scale = (2.0 * nu.coeff * _stable_cos(alpha)) ** (1.0 / alpha)
        return inc + scale * dt ** (1.0 / alpha) * _standard_symmetric_stable(rng, alpha, n)
    # Exact jump-part samplers; the compensator of STANDARD truncation is a
    # deterministic shift -dt * int_{|x|<=1} x nu(dx) once all jumps are kept.
    full_comp = nu.truncated_moment(1, 1.0)
    if isinstance(nu, GammaMeasure):
        return inc - full_comp * dt + rng.gamma(nu.shape * dt, 1.0 / nu.rate, n)
    if isinstance(nu, OneSidedStableMeasure) and nu.index == 0.5:
        return inc - full_comp * dt + _levy_positive(rng, levy_dist_scale(nu.coeff * dt), n)
    if isinstance(nu, AtomicMeasure):
        for pos, mass in nu.atoms:
            inc = inc + pos * rng.poisson(mass * dt, n)
        return inc - full_comp * dt
    if isinstance(nu, CompoundExponentialMeasure):
        counts = rng.poisson(nu.rate * dt, n)
        busy = counts > 0
        jump = np.zeros(n)
        if busy.any():
            jump[busy] = rng.gamma(counts[busy].astype(float), 1.0 / nu.jump_rate)
        return inc - full_comp * dt + jump
    eps = cfg.epsilon if cfg.epsilon is not None else _auto_epsilon(nu, dt * n)
    inc = inc - (full_comp - nu.truncated_moment(1, eps)) * dt
    inc += _compound_poisson_increments(nu, dt, n, eps, rng)
    if cfg.small_jump_mode is SmallJumpMode.GAUSSIAN_SUBSTITUTE:
        var = nu.truncated_moment(2, eps)
        if var > 0:
            inc += math.sqrt(var * dt) * rng.standard_normal(n)
    return inc


def _stable_cos(alpha: float) -> float:
    from .core import stable_cos_integral

    return stable_cos_integral(alpha)


def sample_levy(t: LevyTriplet, grid: TimeGrid, cfg: SimConfig = SimConfig()):
    """Levy path(s) with iid increments per step, started at 0."""

    def draw(stream):
        rng = make_rng(cfg.seed, stream, channel=0)
        return _levy_increments(t, grid.dt, grid.n_steps, cfg, rng)

    return _paths_from_increments(draw, grid, cfg)


# ---------------------------------------------------------------------------
# Time-changed paths.


def _power_samplable(mu: LevyTriplet) -> bool:
    fam = mu.law_family
    if fam is None:
        return False
    if fam is LawFamily.ONE_SIDED_STABLE:
        return mu.law_params[0] == 0.5
    return fam in (
        LawFamily.GAUSSIAN,
        LawFamily.GAMMA,
        LawFamily.POISSON,
        LawFamily.DELTA,
        LawFamily.SYMMETRIC_STABLE,
    )


def sample_subordinated(
    mu_L: LevyTriplet,
    pair: SubordinatorPair,
    grid: TimeGrid,
    cfg: SimConfig = SimConfig(),
    refine: int = 64,
):
    """Path(s) of the time-changed process: the base process run at the
    subordinator's clock.

    Conditionally exact whenever the base law family supports convolution
    power sampling: per step, draw the clock increment, then one exact draw
    from the base law raised to that power. Otherwise the base path is
    simulated on a grid refined by `refine` and read off at the clock times.
    """
    conditional = _power_samplable(mu_L)

    def draw(stream):
        rng_t = make_rng(cfg.seed, stream, channel=0)
        d_t = _subordinator_increments(pair, grid.dt, grid.n_steps, cfg, rng_t)
        rng_x = make_rng(cfg.seed, stream, channel=1)
        if conditional:
            return conv_power_sample(mu_L, d_t, rng_x)
        clock = np.concatenate(([0.0], np.cumsum(d_t)))
        t_end = float(clock[-1])
        if t_end == 0.0:
            return np.zeros(grid.n_steps)
        n_fine = max(int(refine) * grid.n_steps, 64)
        dt_fine = t_end / n_fine
        inc = _levy_increments(mu_L, dt_fine, n_fine, cfg, rng_x)
        path = np.concatenate(([0.0], np.cumsum(inc)))
        idx = np.minimum((clock / dt_fine).astype(int), n_fine)
        return np.diff(path[idx])

    return _paths_from_increments(draw, grid, cfg)


# ---------------------------------------------------------------------------
# Cell fields.


def _cell_value_draws(mu_L, cell, cfg, stream, n_draws):
    rng_t = make_rng(cfg.seed, stream, channel=0)
    d_t = _subordinator_increments(cell.pair, cell.control_mass, n_draws, cfg, rng_t)
    rng_x = make_rng(cfg.seed, stream, channel=1)
    return conv_power_sample(mu_L, d_t, rng_x)


def sample_basis_grid(mu_L: LevyTriplet, fld: SeedField, cfg: SimConfig = SimConfig()) -> GridField:
    """One independent draw per cell: the cell's control mass feeds its
    subordinator seed, whose value then powers the base law."""
    if not _power_samplable(mu_L):
        raise UnsupportedFamily("cell sampling needs a power-samplable base law")
    cells = []
    for idx, cell in enumerate(fld.cells):
        value = float(_cell_value_draws(mu_L, cell, cfg, idx, 1)[0])
        cells.append((cell.rect, cell.volume, value))
    return GridField(tuple(cells), cfg.seed)


def sample_basis_ensemble(mu_L: LevyTriplet, fld: SeedField, cfg: SimConfig, n_draws: int) -> np.ndarray:
    """n_draws independent copies of every cell value; shape (n_draws, n_cells)."""
    if not _power_samplable(mu_L):
        raise UnsupportedFamily("cell sampling needs a power-samplable base law")
    if n_draws < 1:
        raise ConfigError("n_draws must be >= 1")
    cols = [_cell_value_draws(mu_L, cell, cfg, idx, n_draws) for idx, cell in enumerate(fld.cells)]
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# Kernel-smoothed moving averages.


@dataclass(frozen=True)
class LssKernel:
    """Moving-average kernel: exp(-x) or exp(-x) x**alpha, zero for x <= 0."""

    alpha: float = 0.0

    def __post_init__(self):
        if not (self.alpha > -1.0):
            raise ConfigError("kernel exponent must be > -1")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        pos = x > 0
        if self.alpha == 0.0:
            out[pos] = np.exp(-x[pos])
        else:
            out[pos] = np.exp(-x[pos]) * x[pos] ** self.alpha
        return out


def exp_kernel() -> LssKernel:
    return LssKernel(0.0)


def gamma_kernel(alpha: float) -> LssKernel:
    return LssKernel(alpha)


def sample_lss(
    kernel: LssKernel,
    mu_L: LevyTriplet,
    pair: SubordinatorPair,
    grid: TimeGrid,
    burn_in: float,
    cfg: SimConfig = SimConfig(),
):
    """Riemann-sum moving average of time-changed increments.

    Y(t_i) = sum_j kernel(t_i - s_j) dX(s_j) over a grid stretched back to
    t0 - burn_in, so the output window sees a near-stationary state.
    """
    if not (burn_in > 0):
        raise ConfigError("burn_in must be > 0")
    if float(kernel(np.array([burn_in]))[0]) > 1e-8:
        raise ConfigError("burn_in too small: kernel has not decayed to 1e-8")
    m = int(math.ceil(burn_in / grid.dt))
    ext = TimeGrid(grid.t0 - m * grid.dt, grid.dt, m + grid.n_steps)
    weights = kernel(grid.dt * np.arange(ext.n_steps + 1))

    def draw_path(stream):
        rng_t = make_rng(cfg.seed, stream, channel=0)
        d_t = _subordinator_increments(pair, ext.dt, ext.n_steps, cfg, rng_t)
        rng_x = make_rng(cfg.seed, stream, channel=1)
        if _power_samplable(mu_L):
            d_x = conv_power_sample(mu_L, d_t, rng_x)
        else:
            raise UnsupportedFamily("moving-average sampling needs a power-samplable base law")
        y = np.convolve(d_x, weights)[m : m + grid.n_steps + 1]
        return y

    out = []
    for stream in range(cfg.n_paths):
        out.append(PathSample(grid, draw_path(stream), cfg.seed, stream))
    return out[0] if cfg.n_paths == 1 else out
