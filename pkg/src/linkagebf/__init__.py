"""Bayes factor tests for genetic linkage with point-mass mixture priors."""

from .exceptions import (
    ConvergenceError,
    DegenerateHypothesisError,
    DomainError,
    ImproperPriorError,
    LinkageError,
    NoDataError,
    UnsupportedPriorError,
)
from .inference import (
    MarginalResult,
    TestResult,
    bayes_factor_test,
    log_likelihood,
    log_marginal_continuous,
    marginal_approx_haldane,
    marginal_exact_haldane,
    mle,
    posterior_density,
)
from .model import (
    CrossCount,
    FlatHaldane,
    HaldaneDistance,
    ImproperOneOverRho,
    ImproperOneOverRhoOneMinusRho,
    MixturePrior,
    ScaledBeta,
    haldane_inverse,
    haldane_map,
    primrose_mixture,
    prior_density,
    prior_from_dict,
    prior_support,
)
from .numerics import LogValue

__version__ = "0.1.0"
