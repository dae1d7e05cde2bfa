"""Measure functionals, law constructors, and exponent evaluation.

Numeric targets were frozen from independent scipy/mpmath computations on
the defining integrals (see the top-of-file constants); closed identities
are asserted at machine precision.
"""
import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import levymix as lm
from levymix.core import (
    AtomicMeasure,
    CompoundExponentialMeasure,
    GammaMeasure,
    LevyTriplet,
    MeasureClass,
    OneSidedStableMeasure,
    SubordinatorPair,
    SymmetricStableMeasure,
    TabulatedMeasure,
    TruncationConvention,
    ZERO_MEASURE,
    classify_measure,
    convert_convention,
    integral_one_wedge,
    merge_measures,
    merge_pairs,
)
from levymix.errors import DomainError, NotFiniteVariation

INF = float("inf")

# mp.quad of shape*exp(-rate*x)/x and its moment integrands, shape=2 rate=3
GAMMA_MEASURE_MASS_05_2 = 0.19931899990894
GAMMA_MEASURE_TM1 = 0.63347528775475737
GAMMA_MEASURE_TM2 = 0.1779670503396765
GAMMA_MEASURE_ONE_WEDGE1 = 0.65957204994315144
GAMMA_MEASURE_MASS_ABOVE1 = 0.026096762188394074
# mp.quad of 0.7*x**-1.5 integrands
OSS_MASS_1_4 = 0.69999999999999996
OSS_TM1 = 1.3999999999999999
OSS_ONE_WEDGE2 = 1.8666666666666665
# mp.quad of 1.2*2.5*exp(-2.5x) integrands
CEXP_MASS_03_11 = 0.49012642984116861
CEXP_TM1 = 0.34209720231185003
# cmath evaluations of the closed log-CF forms
CHAR_GAMMA23_17 = complex(-0.27847313336647106, 1.0310980149179581)
CHAR_POISSON_09 = complex(-0.487878652553416, 0.73660047818890861)
CHAR_SSTABLE_2 = -2.414953415699773
# 0.4*(-1.1) + mp.quad of (exp(-1.1 s) - 1) * 2 exp(-3 s)/s
LAPLACE_GAMMA_PAIR_M11 = -1.0647493700843049


def test_gamma_measure_functionals():
    g = GammaMeasure(2.0, 3.0)
    assert g.total_mass() == INF
    assert g.interval_mass(0.5, 2.0) == pytest.approx(GAMMA_MEASURE_MASS_05_2, abs=1e-14)
    assert g.truncated_moment(1, 1.0) == pytest.approx(GAMMA_MEASURE_TM1, rel=1e-14)
    assert g.truncated_moment(2, 1.0) == pytest.approx(GAMMA_MEASURE_TM2, rel=1e-14)
    assert g.one_wedge(1) == pytest.approx(GAMMA_MEASURE_ONE_WEDGE1, rel=1e-14)
    assert g.mass_above(1.0) == pytest.approx(GAMMA_MEASURE_MASS_ABOVE1, rel=1e-13)


def test_one_sided_stable_functionals():
    s = OneSidedStableMeasure(0.5, 0.7)
    assert s.interval_mass(1.0, 4.0) == pytest.approx(OSS_MASS_1_4, rel=1e-15)
    assert s.truncated_moment(1, 1.0) == pytest.approx(OSS_TM1, rel=1e-15)
    assert s.one_wedge(2) == pytest.approx(OSS_ONE_WEDGE2, rel=1e-15)
    assert s.one_wedge(1) < INF
    heavy = OneSidedStableMeasure(1.5, 0.7)
    assert heavy.one_wedge(1) == INF
    with pytest.raises(NotFiniteVariation):
        heavy.truncated_moment(1, 1.0)


def test_symmetric_stable_functionals():
    s = SymmetricStableMeasure(1.5, 0.4)
    assert s.one_wedge(1) == INF
    assert s.one_wedge(2) < INF
    # the absolute first moment near 0 diverges for index >= 1
    with pytest.raises(NotFiniteVariation):
        s.truncated_moment(1, 1.0)
    light = SymmetricStableMeasure(0.5, 0.4)
    assert light.one_wedge(1) < INF
    # symmetry: the truncated first moment vanishes identically
    assert light.truncated_moment(1, 1.0) == 0.0


def test_compound_exponential_functionals():
    c = CompoundExponentialMeasure(1.2, 2.5)
    assert c.total_mass() == pytest.approx(1.2, rel=1e-15)
    assert c.interval_mass(0.3, 1.1) == pytest.approx(CEXP_MASS_03_11, rel=1e-14)
    assert c.truncated_moment(1, 1.0) == pytest.approx(CEXP_TM1, rel=1e-14)


def test_atomic_measure_exact():
    a = AtomicMeasure(((0.5, 0.3), (2.0, 1.1)))
    assert a.total_mass() == 0.3 + 1.1
    # half-open (lo, hi]: the atom at 0.5 is excluded from (0.5, 2.0]
    assert a.interval_mass(0.5, 2.0) == 1.1
    assert a.interval_mass(0.4, 0.5) == 0.3
    assert a.truncated_moment(1, 1.0) == 0.5 * 0.3
    assert a.one_wedge(2) == 0.5**2 * 0.3 + 1.1


def test_tabulated_measure_matches_gamma():
    g = GammaMeasure(2.0, 3.0)
    xs = np.geomspace(1e-6, 40.0, 4000)
    t = TabulatedMeasure(tuple(xs), tuple(g.density(xs)))
    # trapezoid on the tabulation grid: discretization error ~ 2e-5 relative
    assert t.interval_mass(0.5, 2.0) == pytest.approx(GAMMA_MEASURE_MASS_05_2, rel=1e-4)
    assert t.truncated_moment(1, 1.0) == pytest.approx(GAMMA_MEASURE_TM1, rel=1e-4)


def test_measure_classification_nesting():
    finite = AtomicMeasure(((1.0, 0.5),))
    fv = GammaMeasure(2.0, 3.0)
    levy_only = SymmetricStableMeasure(1.5, 0.4)
    assert classify_measure(finite) is MeasureClass.FINITE
    assert classify_measure(fv) is MeasureClass.FINITE_VARIATION
    assert classify_measure(levy_only) is MeasureClass.LEVY
    # nesting: the smaller class always has the larger classes' integrals finite
    for m in (finite, fv):
        assert integral_one_wedge(m, 1) < INF
        assert integral_one_wedge(m, 2) < INF
    assert integral_one_wedge(levy_only, 2) < INF


def test_char_exponent_frozen_values():
    assert lm.char_exponent(lm.gamma_law(2.0, 3.0), 1.7) == pytest.approx(
        CHAR_GAMMA23_17, abs=1e-14
    )
    assert lm.char_exponent(lm.poisson_law(0.8, 1.3), 0.9) == pytest.approx(
        CHAR_POISSON_09, abs=1e-14
    )
    assert lm.char_exponent(lm.symmetric_stable_law(1.5, 0.9), 2.0) == pytest.approx(
        CHAR_SSTABLE_2, abs=1e-14
    )


def test_char_exponent_gaussian_and_delta():
    t = lm.gaussian_law(0.4, 1.5)
    th = 2.3
    assert lm.char_exponent(t, th) == pytest.approx(
        1j * th * 0.4 - 0.5 * 1.5 * th * th, abs=1e-15
    )
    assert lm.char_exponent(lm.delta_law(-0.7), th) == pytest.approx(
        1j * th * -0.7, abs=1e-15
    )


FIXTURE_LAWS = [
    lm.gaussian_law(0.3, 1.2),
    lm.gamma_law(2.0, 3.0),
    lm.poisson_law(0.8, 1.3),
    lm.poisson_law(2.0, -0.4),
    lm.delta_law(1.1),
    lm.symmetric_stable_law(0.7, 0.9),
    lm.cauchy_law(0.5),
    lm.symmetric_stable_law(1.6, 1.1),
    lm.one_sided_stable_law(0.5, 0.6),
]


@pytest.mark.parametrize("law", FIXTURE_LAWS, ids=lambda t: str(t.law_family))
def test_char_exponent_is_a_valid_log_cf(law):
    assert lm.char_exponent(law, 0.0) == 0
    for th in np.linspace(-9.0, 9.0, 25):
        v = lm.char_exponent(law, th)
        assert abs(cmath.exp(v)) <= 1.0 + 1e-12
        # conjugate symmetry of the law's CF
        w = lm.char_exponent(law, -th)
        assert w == pytest.approx(v.conjugate(), abs=1e-12)


def test_laplace_exponent_frozen_value():
    pair = SubordinatorPair(0.4, GammaMeasure(2.0, 3.0))
    assert lm.laplace_exponent(pair, -1.1) == pytest.approx(
        LAPLACE_GAMMA_PAIR_M11, rel=1e-10
    )
    # at z = 0 the exponent vanishes
    assert lm.laplace_exponent(pair, 0.0) == 0


def test_laplace_exponent_additive_under_pair_convolution():
    rng = np.random.default_rng(7)
    p1 = SubordinatorPair(0.2, GammaMeasure(1.0, 2.0))
    p2 = SubordinatorPair(0.5, GammaMeasure(0.7, 2.0))
    merged = merge_pairs(p1, p2)
    for _ in range(20):
        z = complex(-rng.uniform(0.0, 4.0), rng.uniform(-3.0, 3.0))
        lhs = lm.laplace_exponent(merged, z)
        rhs = lm.laplace_exponent(p1, z) + lm.laplace_exponent(p2, z)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_merge_measures_families():
    a = merge_measures(AtomicMeasure(((1.0, 0.5),)), AtomicMeasure(((2.0, 0.25),)))
    assert a.total_mass() == 0.75
    g = merge_measures(GammaMeasure(1.0, 2.0), GammaMeasure(0.5, 2.0))
    assert isinstance(g, GammaMeasure) and g.shape == 1.5
    assert merge_measures(ZERO_MEASURE, g) is g
    with pytest.raises(lm.UnsupportedFamily):
        merge_measures(GammaMeasure(1.0, 2.0), GammaMeasure(1.0, 3.0))


def test_convert_convention_round_trip():
    for law in (lm.gamma_law(2.0, 3.0), lm.poisson_law(0.8, 1.3), lm.one_sided_stable_law(0.5, 0.6)):
        moved = convert_convention(law, TruncationConvention.ZERO)
        assert moved.convention is TruncationConvention.ZERO
        back = convert_convention(moved, TruncationConvention.STANDARD)
        assert back.drift == pytest.approx(law.drift, abs=1e-12)
        # both conventions express the same law
        for th in (0.5, 2.0, -3.5):
            assert lm.char_exponent(moved, th) == pytest.approx(
                lm.char_exponent(law, th), abs=1e-12
            )


def test_zero_convention_rejects_infinite_variation():
    with pytest.raises(NotFiniteVariation):
        LevyTriplet(0.0, 0.0, SymmetricStableMeasure(1.5, 0.4), TruncationConvention.ZERO)


def test_subordinator_pair_validation():
    with pytest.raises(DomainError):
        SubordinatorPair(-0.1, ZERO_MEASURE)
    with pytest.raises(DomainError):
        SubordinatorPair(0.0, SymmetricStableMeasure(0.5, 0.4))
    with pytest.raises(NotFiniteVariation):
        SubordinatorPair(0.0, OneSidedStableMeasure(1.2, 0.4))


def test_levy_dist_scale():
    assert lm.levy_dist_scale(0.5) == 2.0 * math.pi * 0.25


def test_stable_cos_integral_matches_quadrature():
    from scipy import integrate

    for alpha in (0.5, 1.0, 1.7):
        head, _ = integrate.quad(
            lambda u: (1.0 - math.cos(u)) * u ** (-1.0 - alpha), 0.0, 30.0, limit=400
        )
        # tail: split off the oscillatory part, handled by the cosine-weight rule
        tail_one = 30.0**-alpha / alpha
        tail_cos, _ = integrate.quad(
            lambda u: u ** (-1.0 - alpha), 30.0, np.inf, weight="cos", wvar=1.0
        )
        assert lm.stable_cos_integral(alpha) == pytest.approx(
            head + tail_one - tail_cos, rel=1e-9
        )


@given(
    lo=st.floats(0.01, 5.0),
    width=st.floats(0.01, 5.0),
    split=st.floats(0.1, 0.9),
)
@settings(max_examples=60, deadline=None)
def test_interval_mass_additive_over_split(lo, width, split):
    g = GammaMeasure(1.3, 2.1)
    hi = lo + width
    mid = lo + split * width
    whole = g.interval_mass(lo, hi)
    parts = g.interval_mass(lo, mid) + g.interval_mass(mid, hi)
    assert parts == pytest.approx(whole, rel=1e-12, abs=1e-15)


@given(factor=st.floats(0.1, 10.0))
@settings(max_examples=40, deadline=None)
def test_scaled_measure_scales_functionals(factor):
    g = GammaMeasure(1.3, 2.1)
    sc = g.scaled(factor)
    assert sc.interval_mass(0.5, 2.0) == pytest.approx(
        factor * g.interval_mass(0.5, 2.0), rel=1e-12
    )
    assert sc.truncated_moment(2, 1.0) == pytest.approx(
        factor * g.truncated_moment(2, 1.0), rel=1e-12
    )


@given(eps=st.floats(0.01, 2.0), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_sample_tail_respects_cutoff(eps, seed):
    rng = np.random.default_rng(seed)
    for m in (GammaMeasure(1.3, 2.1), OneSidedStableMeasure(0.5, 0.7),
              CompoundExponentialMeasure(1.2, 2.5)):
        if m.mass_above(eps) <= 0:
            continue
        x = m.sample_tail(rng, eps, 64)
        assert x.shape == (64,)
        assert np.all(x >= eps)


def test_tail_cutoff_bounds_remaining_mass():
    for m in (GammaMeasure(2.0, 3.0), OneSidedStableMeasure(0.5, 0.7)):
        cut = m.tail_cutoff(1e-9)
        # the stable cutoff solves its bound with equality
        assert m.mass_above(cut) <= 1e-9 * (1.0 + 1e-12)
