"""Distributional calculus, simulation and recovery for subordinated Levy
processes and Levy bases."""

from .core import (
    AtomicMeasure,
    CompoundExponentialMeasure,
    GammaMeasure,
    LawFamily,
    LevyMeasure,
    LevyTriplet,
    MeasureClass,
    MeasureFamily,
    OneSidedStableMeasure,
    SubordinatorPair,
    SymmetricStableMeasure,
    TabulatedMeasure,
    TruncationConvention,
    ZERO_MEASURE,
    ZeroMeasure,
    cauchy_law,
    char_exponent,
    classify_measure,
    convert_convention,
    delta_law,
    gamma_law,
    gaussian_law,
    integral_one_wedge,
    laplace_exponent,
    levy_dist_scale,
    merge_measures,
    merge_pairs,
    one_sided_stable_law,
    poisson_law,
    stable_cos_integral,
    symmetric_stable_law,
    truncated_mean,
)
from .errors import (
    BranchAmbiguity,
    ConfigError,
    DegenerateBaseProcess,
    DomainError,
    EmptyInput,
    GridTooCoarse,
    InsufficientPoints,
    LevyMixError,
    NearZeroCF,
    NonConvergence,
    NotFiniteVariation,
    QuadratureFailure,
    SpecError,
    UnsupportedFamily,
)

__version__ = "0.1.0"

from .mixing import (
    IntervalSet,
    MixResult,
    check_domain,
    conv_power_cdf,
    conv_power_density,
    conv_power_interval_mass,
    conv_power_set_mass,
    conv_power_truncated_mean,
    integrate_rho,
    lemma_constant,
    mixing_cf,
    phi_mix_density_gamma,
    phi_mix_mass,
    phi_mix_stable,
    small_s_ratio,
)
from .subordinate import (
    SeedCell,
    SeedField,
    SubordinatedTriplet,
    basis_quadruplet,
    cell_log_cf,
    compose_cf,
    cf_from_triplet,
    subordinate_triplet,
)
from .simulate import (
    GridField,
    LssKernel,
    PathSample,
    SimConfig,
    SmallJumpMode,
    TimeGrid,
    conv_power_sample,
    exp_kernel,
    gamma_kernel,
    make_rng,
    sample_basis_ensemble,
    sample_basis_grid,
    sample_levy,
    sample_lss,
    sample_subordinated,
    sample_subordinator,
)
from .recover import (
    CFSample,
    FitOptions,
    FitResult,
    PsiCurve,
    default_theta_grid,
    empirical_cf,
    analytic_cf,
    fit_subordinator,
    ou_invert,
    psi_curve,
    recover_from_path,
    trim_cf,
    unwrap_log_cf,
)
