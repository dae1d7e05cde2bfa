"""Clock-law recovery from observed increments of the subordinated process.

The pipeline under test: empirical/analytic CF -> branch-tracked log ->
curve of exponent samples -> parametric least squares. Noiseless routes
must recover parameters to near machine precision; seeded Monte Carlo
routes are held to statistical bounds.
"""
import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import levymix as lm
from levymix.core import (
    CompoundExponentialMeasure,
    GammaMeasure,
    OneSidedStableMeasure,
    SubordinatorPair,
    ZERO_MEASURE,
)
from levymix.errors import (
    BranchAmbiguity,
    DegenerateBaseProcess,
    EmptyInput,
    GridTooCoarse,
    InsufficientPoints,
    NearZeroCF,
)
from levymix.recover import (
    CFSample,
    FitOptions,
    PsiCurve,
    analytic_cf,
    default_theta_grid,
    empirical_cf,
    fit_subordinator,
    ou_invert,
    psi_curve,
    recover_from_path,
    trim_cf,
    unwrap_log_cf,
)
from levymix.simulate import SimConfig, TimeGrid, PathSample, sample_subordinated, sample_lss, exp_kernel, make_rng
from levymix.subordinate import compose_cf

VG_BASE = lm.gaussian_law()
VG_PAIR = SubordinatorPair(0.0, GammaMeasure(1.0, 1.0))


def _vg_curve(theta=None):
    grid = default_theta_grid() if theta is None else theta
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, VG_PAIR, t), grid)
    return psi_curve(VG_BASE, cf)


# --- CF construction -----------------------------------------------------------


def test_default_theta_grid_hits_zero_exactly():
    g = default_theta_grid()
    assert g.size == 101
    assert g[50] == 0.0
    assert g[0] == -10.0 and g[-1] == 10.0


def test_empirical_cf_constant_data_is_exact():
    inc = np.full(1000, 0.7)
    cf = empirical_cf(inc, np.array([-1.0, 0.0, 2.0]))
    assert cf.values[1] == 1.0
    assert cf.values[0] == pytest.approx(cmath.exp(-1j * 0.7), abs=1e-12)
    assert cf.values[2] == pytest.approx(cmath.exp(2j * 0.7), abs=1e-12)
    assert cf.n_obs == 1000
    with pytest.raises(EmptyInput):
        empirical_cf(np.array([]), np.array([-1.0, 0.0, 1.0]))


def test_empirical_cf_matches_direct_mean():
    rng = np.random.default_rng(0)
    x = rng.normal(0.3, 1.0, 5000)
    grid = np.array([-2.0, 0.0, 0.5, 3.0])
    cf = empirical_cf(x, grid)
    for j, th in enumerate(grid):
        if th == 0.0:
            continue
        assert cf.values[j] == pytest.approx(np.exp(1j * th * x).mean(), abs=1e-12)


def test_cf_sample_validation():
    with pytest.raises(lm.DomainError):
        CFSample(np.array([0.0, 1.0]), np.array([1.0 + 0j]))
    with pytest.raises(lm.DomainError):
        CFSample(np.array([0.0, 1.0, 0.5]), np.array([1.0 + 0j, 0.5, 0.5]))
    with pytest.raises(lm.DomainError):
        CFSample(np.array([-1.0, 1.0]), np.array([0.5 + 0j, 0.5]))
    with pytest.raises(lm.DomainError):
        CFSample(np.array([-1.0, 0.0]), np.array([0.5 + 0j, 0.99]))
    # modulus bound: hard for analytic input, slack 4/sqrt(n) for empirical
    with pytest.raises(lm.DomainError):
        CFSample(np.array([0.0, 1.0]), np.array([1.0, 1.5 + 0j]), n_obs=0)
    ok = CFSample(np.array([0.0, 1.0]), np.array([1.0, 1.002 + 0j]), n_obs=1_000_000)
    assert ok.zero_index() == 0


def test_trim_cf_keeps_window_around_zero():
    grid = np.arange(-3.0, 4.0)
    vals = np.array([0.001, 0.5, 0.9, 1.0, 0.9, 0.001, 0.4], dtype=complex)
    cf = CFSample(grid, vals, n_obs=0)
    t = trim_cf(cf, 0.1)
    assert np.array_equal(t.theta_grid, np.arange(-2.0, 2.0))
    assert t.n_obs == cf.n_obs
    with pytest.raises(NearZeroCF):
        trim_cf(cf, 1.0)


# --- branch tracking -----------------------------------------------------------


def test_unwrap_matches_analytic_log_on_vg():
    grid = default_theta_grid()
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, VG_PAIR, t), grid)
    h = unwrap_log_cf(cf)
    want = np.array([compose_cf(VG_BASE, VG_PAIR, t) for t in grid])
    assert np.max(np.abs(h - want)) <= 1e-12


def test_unwrap_tracks_winding_phase():
    # a pure drift winds the phase through many branches of the principal log
    grid = default_theta_grid()
    cf = analytic_cf(lambda t: 2.4j * t, grid)
    h = unwrap_log_cf(cf)
    assert np.max(np.abs(h - 2.4j * grid)) <= 1e-12


@given(shape=st.floats(0.3, 3.0), rate=st.floats(0.5, 4.0), drift=st.floats(0.0, 1.5))
@settings(max_examples=25, deadline=None)
def test_unwrap_exponential_reproduces_values(shape, rate, drift):
    pair = SubordinatorPair(drift, GammaMeasure(shape, rate))
    grid = default_theta_grid()
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, pair, t), grid)
    h = unwrap_log_cf(cf)
    assert np.max(np.abs(np.exp(h) - cf.values)) <= 1e-12


def test_unwrap_rejects_pi_step():
    grid = np.array([-1.0, 0.0, 1.0])
    cf = CFSample(grid, np.exp(1j * math.pi * grid), n_obs=0)
    with pytest.raises(BranchAmbiguity):
        unwrap_log_cf(cf)


def test_unwrap_rejects_noise_floor_on_empirical_input():
    grid = np.array([-1.0, 0.0, 1.0])
    vals = np.exp(-3.0 * np.abs(grid)).astype(complex)  # 0.0498 < 10/sqrt(10000)
    cf = CFSample(grid, vals, n_obs=10_000)
    with pytest.raises(NearZeroCF):
        unwrap_log_cf(cf)
    # the same values pass as analytic input
    assert np.max(np.abs(np.exp(unwrap_log_cf(CFSample(grid, vals, n_obs=0))) - vals)) <= 1e-14


# --- the exponent-sample curve ---------------------------------------------------


def test_psi_curve_anchor_and_values():
    curve = _vg_curve()
    j0 = int(np.flatnonzero(curve.theta == 0.0)[0])
    assert curve.z[j0] == 0.0
    assert curve.psi_hat[j0] == 0.0
    # z sweeps the base exponent, h the clock exponent evaluated there
    for j in (0, 13, 77, 100):
        th = curve.theta[j]
        if th == 0.0:
            continue
        assert curve.z[j] == pytest.approx(-0.5 * th * th, abs=1e-13)
        assert curve.psi_hat[j] == pytest.approx(-cmath.log(1.0 + 0.5 * th * th), abs=1e-12)


def test_psi_curve_rejects_degenerate_base_at_zero():
    grid = default_theta_grid()
    cf = analytic_cf(lambda t: 0.0j * t, grid)
    with pytest.raises(DegenerateBaseProcess):
        psi_curve(lm.delta_law(0.0), cf)
    # nonzero drift is fine: the sweep runs along the imaginary axis
    cf2 = analytic_cf(lambda t: compose_cf(lm.delta_law(1.0), VG_PAIR, t), grid)
    curve = psi_curve(lm.delta_law(1.0), cf2)
    assert np.max(np.abs(curve.z.real)) == 0.0


# --- parametric fitting -----------------------------------------------------------


def test_fit_gamma_noiseless_exact():
    pair = SubordinatorPair(0.4, GammaMeasure(2.0, 3.0))
    grid = default_theta_grid()
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, pair, t), grid)
    curve = psi_curve(VG_BASE, cf)
    fit = fit_subordinator(curve, "gamma")
    a, lam = fit.params
    assert abs(a - 2.0) / 2.0 < 1e-6
    assert abs(lam - 3.0) / 3.0 < 1e-6
    assert abs(fit.beta0_hat - 0.4) < 1e-6
    assert fit.objective < 1e-12
    assert fit.n_starts_converged >= 1
    assert fit.residual_max < 1e-6


def test_fit_drift_family_is_exact_projection():
    pair = SubordinatorPair(1.5, ZERO_MEASURE)
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, pair, t), default_theta_grid())
    curve = psi_curve(VG_BASE, cf)
    fit = fit_subordinator(curve, "drift")
    assert fit.family == "drift"
    assert fit.params == ()
    assert fit.beta0_hat == pytest.approx(1.5, abs=1e-12)
    assert fit.objective < 1e-20


def test_fit_compound_exponential_noiseless():
    pair = SubordinatorPair(0.4, CompoundExponentialMeasure(1.2, 2.5))
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, pair, t), default_theta_grid())
    curve = psi_curve(VG_BASE, cf)
    fit = fit_subordinator(curve, "compound_exponential")
    mass, lam = fit.params
    assert abs(mass - 1.2) / 1.2 < 1e-5
    assert abs(lam - 2.5) / 2.5 < 1e-5
    assert abs(fit.beta0_hat - 0.4) < 1e-5


def test_fit_one_sided_stable_fixed_and_free_index():
    pair = SubordinatorPair(0.0, OneSidedStableMeasure(0.6, 0.8))
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, pair, t), default_theta_grid())
    curve = psi_curve(VG_BASE, cf)
    fixed = fit_subordinator(curve, "one_sided_stable", FitOptions(fixed_alpha=0.6))
    assert fixed.params[0] == 0.6
    assert abs(fixed.params[1] - 0.8) / 0.8 < 1e-5
    free = fit_subordinator(curve, "one_sided_stable", FitOptions(max_evals=40_000))
    assert abs(free.params[0] - 0.6) < 1e-4
    assert abs(free.params[1] - 0.8) / 0.8 < 1e-3


def test_fit_rejects_short_curves():
    grid = np.array([-0.4, -0.2, 0.0, 0.2, 0.4])
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, VG_PAIR, t), grid)
    curve = psi_curve(VG_BASE, cf)
    with pytest.raises(InsufficientPoints):
        fit_subordinator(curve, "gamma")


def test_fit_unknown_family():
    with pytest.raises(lm.UnsupportedFamily):
        fit_subordinator(_vg_curve(), "zeta")


def test_forward_inverse_consistency_twenty_draws():
    # random admissible parameters per family; the noiseless round trip
    # recovers them to relative error < 1e-5
    rng = np.random.default_rng(2024)
    grid = default_theta_grid()
    draws = []
    for _ in range(7):
        draws.append(("gamma", SubordinatorPair(
            float(rng.uniform(0.0, 2.0)),
            GammaMeasure(float(rng.uniform(0.5, 3.0)), float(rng.uniform(0.8, 4.0))),
        )))
    for _ in range(7):
        draws.append(("compound_exponential", SubordinatorPair(
            float(rng.uniform(0.0, 2.0)),
            CompoundExponentialMeasure(float(rng.uniform(0.5, 2.5)), float(rng.uniform(0.8, 4.0))),
        )))
    for _ in range(3):
        draws.append(("one_sided_stable", SubordinatorPair(
            0.0,
            OneSidedStableMeasure(float(rng.uniform(0.3, 0.7)), float(rng.uniform(0.3, 1.2))),
        )))
    for _ in range(3):
        draws.append(("drift", SubordinatorPair(float(rng.uniform(0.2, 3.0)), ZERO_MEASURE)))
    assert len(draws) == 20

    for family, pair in draws:
        cf = analytic_cf(lambda t: compose_cf(VG_BASE, pair, t), grid)
        curve = psi_curve(VG_BASE, cf)
        opts = FitOptions(seed=1, max_evals=40_000)
        if family == "one_sided_stable":
            opts = FitOptions(seed=1, max_evals=40_000, fixed_alpha=pair.jumps.index)
        fit = fit_subordinator(curve, family, opts)
        assert abs(fit.beta0_hat - pair.drift) / max(pair.drift, 1.0) < 1e-5
        if family == "gamma":
            truth = (pair.jumps.shape, pair.jumps.rate)
        elif family == "compound_exponential":
            truth = (pair.jumps.rate, pair.jumps.jump_rate)
        elif family == "one_sided_stable":
            truth = (pair.jumps.index, pair.jumps.coeff)
        else:
            truth = ()
        for got, want in zip(fit.params, truth):
            assert abs(got - want) / abs(want) < 1e-5, (family, fit.params, truth)


def test_cross_family_objective_separation():
    # the true family fits essentially exactly; a wrong family's best
    # objective stays at least 10x larger (it is larger by many orders)
    pair = SubordinatorPair(0.0, GammaMeasure(2.0, 3.0))
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, pair, t), default_theta_grid())
    curve = psi_curve(VG_BASE, cf)
    true_fit = fit_subordinator(curve, "gamma")
    wrong_fit = fit_subordinator(curve, "compound_exponential")
    assert wrong_fit.objective >= 10.0 * max(true_fit.objective, 1e-300)
    assert wrong_fit.objective > 1e-4


def test_equal_mean_gamma_clocks_are_separated():
    # gamma(1,1) and gamma(2,2) have the same mean; the exponent curves
    # still differ by a comfortable margin, and fitting the wrong clock
    # leaves a large objective
    p_true = SubordinatorPair(0.0, GammaMeasure(1.0, 1.0))
    p_conf = SubordinatorPair(0.0, GammaMeasure(2.0, 2.0))
    grid = default_theta_grid()
    gap = max(
        abs(compose_cf(VG_BASE, p_true, float(t)) - compose_cf(VG_BASE, p_conf, float(t)))
        for t in grid
    )
    assert gap > 0.01
    cf = analytic_cf(lambda t: compose_cf(VG_BASE, p_true, t), grid)
    curve = psi_curve(VG_BASE, cf)
    free = fit_subordinator(curve, "gamma")
    confined = _confounder_objective(curve, a=2.0, lam=2.0)
    assert confined >= 10.0 * max(free.objective, 1e-300)


def _confounder_objective(curve, a, lam):
    pred = -a * np.log(1.0 - curve.z / lam)
    resid = pred - curve.psi_hat
    return float(np.sum(np.abs(resid) ** 2))


# --- end-to-end recovery -----------------------------------------------------------


def _vg_path(n, seed):
    return sample_subordinated(VG_BASE, VG_PAIR, TimeGrid(0.0, 1.0, n), SimConfig(seed=seed))


def test_recover_from_path_vg_smoke():
    path = _vg_path(20_000, seed=1)
    fit = recover_from_path(path, VG_BASE, "gamma", FitOptions(seed=0, weighted=True))
    a, lam = fit.params
    assert abs(a - 1.0) < 0.25
    assert abs(lam - 1.0) < 0.25


def test_recover_from_path_rescales_time_spacing():
    # increments observed every dt = 0.5: the per-step curve sees half the
    # clock, and the result is reported per unit time
    pair = SubordinatorPair(0.0, GammaMeasure(2.0, 3.0))
    path = sample_subordinated(VG_BASE, pair, TimeGrid(0.0, 0.5, 60_000), SimConfig(seed=4))
    fit = recover_from_path(path, VG_BASE, "gamma", FitOptions(seed=0, weighted=True))
    a, lam = fit.params
    assert abs(a - 2.0) / 2.0 < 0.15
    assert abs(lam - 3.0) / 3.0 < 0.15


def test_statistical_consistency_on_doubling():
    # with the sample doubled from 1e5 to 2e5 on the acceptance seed the
    # error must not grow by more than 50%, and the median error over ten
    # seed replicates must decrease
    def rel_err(inc, n):
        grid = TimeGrid(0.0, 1.0, n)
        path = PathSample(grid, np.concatenate(([0.0], np.cumsum(inc[:n]))), 0, 0)
        fit = recover_from_path(path, VG_BASE, "gamma", FitOptions(seed=0, weighted=True))
        a, lam = fit.params
        return max(abs(a - 1.0), abs(lam - 1.0))

    inc13 = _vg_path(200_000, seed=13).increments()
    e1, e2 = rel_err(inc13, 100_000), rel_err(inc13, 200_000)
    assert e2 <= 1.5 * e1

    errs_small, errs_big = [], []
    for seed in range(10):
        inc = _vg_path(200_000, seed=seed).increments()
        errs_small.append(rel_err(inc, 100_000))
        errs_big.append(rel_err(inc, 200_000))
    assert np.median(errs_big) < np.median(errs_small)


# --- moving-average inversion --------------------------------------------------------


def test_ou_invert_recovers_manufactured_increments():
    dt = 0.01
    rng = np.random.default_rng(5)
    d_l = rng.gamma(0.5, 1.0, 400)
    y = np.zeros(d_l.size + 1)
    for i in range(d_l.size):
        y[i + 1] = y[i] - y[i] * dt + d_l[i]
    grid = TimeGrid(0.0, dt, d_l.size)
    path = PathSample(grid, y, 0, 0)
    back = ou_invert(path)
    assert np.max(np.abs(back - d_l)) <= 1e-12


def test_ou_invert_rejects_coarse_grids():
    grid = TimeGrid(0.0, 0.2, 10)
    path = PathSample(grid, np.zeros(11), 0, 0)
    with pytest.raises(GridTooCoarse):
        ou_invert(path)


def test_ou_invert_approximates_lss_driver():
    # against the exp-kernel moving average the inversion recovers the
    # driving increments up to O(dt) discretization error
    pair = SubordinatorPair(0.2, GammaMeasure(1.0, 1.0))
    grid = TimeGrid(0.0, 1e-3, 4000)
    cfg = SimConfig(seed=3)
    burn_in = 25.0
    y = sample_lss(exp_kernel(), VG_BASE, pair, grid, burn_in, cfg)
    m = int(math.ceil(burn_in / grid.dt))
    from levymix.simulate import conv_power_sample, sample_subordinator

    d_t = sample_subordinator(
        pair, TimeGrid(grid.t0 - m * grid.dt, grid.dt, m + grid.n_steps), cfg
    ).increments()
    d_x = conv_power_sample(VG_BASE, d_t, make_rng(cfg.seed, 0, channel=1))[m:]
    back = ou_invert(y)
    mae = float(np.mean(np.abs(back - d_x)))
    assert mae < 0.02 * float(np.mean(np.abs(d_x)))
