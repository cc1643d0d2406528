"""Inference for the difference of two Negative Binomial means."""

from .concentration import (
    BernsteinContext,
    DegenerateContext,
    alpha_for_epsilon,
    build_context,
    epsilon_for_alpha,
    two_sample_transform,
)
from .distributions import (
    DispersionInestimable,
    NegBinParams,
    SampleStats,
    mom_dispersion,
    nb_moments,
    nb_pmf,
    nb_sample,
    summarize,
)
from .inference import (
    IntervalEstimate,
    MethodKind,
    TestResult,
    ci_bernstein_one_sample,
    ci_bernstein_two_sample,
    ci_mixture,
    ci_normal_one_sample,
    ci_normal_two_sample,
    gamma_approx_params,
    normal_approx_divergence,
    select_method,
    test_mean_difference,
    variance_of_difference,
)
from .simulation import (
    ExperimentGrid,
    ExperimentResult,
    ExperimentSpec,
    coverage_margin,
    run_experiment,
    run_grid,
    summarize_lengths,
)

__version__ = "0.1.0"
