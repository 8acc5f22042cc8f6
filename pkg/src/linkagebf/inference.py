"""Likelihood, marginal likelihoods, Bayes factors and posteriors for linkage."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegenerateHypothesisError,
    ImproperPriorError,
    NoDataError,
    UnsupportedPriorError,
)
from .model import (
    UNLINKED_RHO,
    ContinuousPrior,
    CrossCount,
    FlatHaldane,
    MixturePrior,
    check_rho,
)
from .numerics import (
    LogValue,
    integrate,
    log_binom_pmf,
    log_choose,
    log_reg_inc_beta,
    log_sum_weighted,
)

__all__ = [
    "MarginalResult",
    "TestResult",
    "log_likelihood",
    "log_likelihood_array",
    "marginal_approx_haldane",
    "marginal_exact_haldane",
    "log_marginal_continuous",
    "bayes_factor_test",
    "posterior_density",
    "mle",
]

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
APPROXIMATION = "approximation"

# Quadrature tolerance for marginals; tight enough to match closed forms to 1e-10.
MARGINAL_REL_TOL = 1e-12


@dataclass(frozen=True)
class MarginalResult:
    log_marginal: LogValue
    method: str
    error_estimate: float = 0.0

    def value(self) -> float:
        return self.log_marginal.value()


@dataclass(frozen=True)
class TestResult:
    """Outcome of the linked (continuous) vs unlinked (point mass) test.

    The Bayes factor is linked:unlinked.
    """

    log_bayes_factor: float
    prior_odds: float
    log_posterior_odds: float
    posterior_odds: float
    posterior_prob_linked: float
    log_marginal_linked: LogValue
    log_likelihood_unlinked: LogValue
    log_marginal_mixture: LogValue

    __test__ = False  # not a pytest class

    @property
    def bayes_factor(self) -> float:
        return _safe_exp(self.log_bayes_factor)


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def log_likelihood(data: CrossCount, rho: float) -> LogValue:
    """Binomial log probability of the observed crossovers at rate ``rho``."""
    rho = check_rho(rho)
    return LogValue.from_log(log_binom_pmf(data.n_crossovers, data.n_meioses, rho))


def log_likelihood_array(data: CrossCount, rho: np.ndarray) -> np.ndarray:
    """Vectorized log-likelihood; ``-inf`` where the probability is exactly 0."""
    r = np.asarray(rho, dtype=float)
    y, m = data.n_crossovers, data.n_parental
    out = np.full(r.shape, log_choose(data.n_meioses, y))
    with np.errstate(divide="ignore", invalid="ignore"):
        if y > 0:
            out = out + y * np.log(r)
        if m > 0:
            out = out + m * np.log1p(-r)
    return out


def _require_flat(mixture: MixturePrior) -> None:
    if not isinstance(mixture.continuous, FlatHaldane):
        raise UnsupportedPriorError(
            "Haldane's closed forms apply to the flat prior only, got "
            f"{mixture.continuous.type_name}"
        )


def _log_weight(weight: float) -> float:
    return math.log(weight) if weight > 0 else -math.inf


def _log_flat_extended(data: CrossCount, mixture: MixturePrior) -> float:
    # weight * 2 * C(N, y) * B(y + 1, N - y + 1), the flat density carried
    # over [0, 1]. C(N, y) B(y + 1, N - y + 1) is exactly 1 / (N + 1).
    return _log_weight(mixture.continuous_weight) + math.log(2.0) - math.log(data.n_meioses + 1)


def marginal_approx_haldane(data: CrossCount, mixture: MixturePrior) -> MarginalResult:
    """Linked part of the marginal with the flat prior's upper limit pushed to 1.

    For 160 crossovers in 400 meioses and weight 1/12 this is 1/(6 * 401).
    """
    _require_flat(mixture)
    return MarginalResult(LogValue.from_log(_log_flat_extended(data, mixture)), APPROXIMATION)


def marginal_exact_haldane(data: CrossCount, mixture: MixturePrior) -> MarginalResult:
    """Linked part of the marginal under the flat prior, integrated over [0, 1/2].

    Equals the approximation times I_{1/2}(y + 1, N - y + 1).
    """
    _require_flat(mixture)
    y, m = data.n_crossovers, data.n_parental
    log_value = _log_flat_extended(data, mixture) + log_reg_inc_beta(UNLINKED_RHO, y + 1, m + 1)
    return MarginalResult(LogValue.from_log(log_value), CLOSED_FORM)


def _require_proper(prior: ContinuousPrior) -> None:
    if not prior.is_proper:
        raise ImproperPriorError(
            f"the {prior.type_name} prior is improper; marginal likelihoods are undefined"
        )


def _likelihood_peak(data: CrossCount, lo: float, hi: float) -> float:
    if data.n_meioses == 0:
        return 0.5 * (lo + hi)
    return min(max(data.n_crossovers / data.n_meioses, lo), hi)


def _log_kernel(data: CrossCount, rho: float) -> float:
    # y ln(rho) + (N - y) ln(1 - rho), without the binomial coefficient.
    y, m = data.n_crossovers, data.n_parental
    if rho <= 0.0:
        return -math.inf if y > 0 else 0.0
    return (y * math.log(rho) if y else 0.0) + (m * math.log1p(-rho) if m else 0.0)


def _log_kernel_ratio(data: CrossCount, rho: float, peak: float) -> float:
    # _log_kernel(rho) - _log_kernel(peak) via log1p of relative steps, which
    # keeps full precision near the peak when N is large.
    y, m = data.n_crossovers, data.n_parental
    if peak <= 0.0:
        return _log_kernel(data, rho)
    if rho <= 0.0:
        return -math.inf if y > 0 else 0.0
    total = 0.0
    if y:
        total += y * math.log1p((rho - peak) / peak)
    if m:
        total += m * math.log1p((peak - rho) / (1.0 - peak))
    return total


def log_marginal_continuous(data: CrossCount, prior: ContinuousPrior) -> MarginalResult:
    """Marginal likelihood of ``data`` under a proper continuous prior, by quadrature.

    The integrand is the likelihood relative to its value at the peak within
    the support, times the density, so it never overflows and stays at order
    one near the peak.
    """
    _require_proper(prior)
    lo, hi = prior.support()
    peak = _likelihood_peak(data, lo, hi)

    def integrand(rho: float) -> float:
        dens = float(prior.density(rho))
        if dens == 0.0:
            return 0.0
        return math.exp(_log_kernel_ratio(data, rho, peak)) * dens

    points = (peak,) if lo < peak < hi else ()
    result = integrate(integrand, lo, hi, rel_tol=MARGINAL_REL_TOL, points=points)
    if result.value <= 0.0:
        return MarginalResult(LogValue.zero(), QUADRATURE, 0.0)
    log_scale = log_binom_pmf(data.n_crossovers, data.n_meioses, peak)
    error = result.error_estimate * _safe_exp(log_scale)
    return MarginalResult(LogValue.from_log(log_scale + math.log(result.value)), QUADRATURE, error)


def bayes_factor_test(data: CrossCount, mixture: MixturePrior) -> TestResult:
    """Bayes factor for linkage (continuous prior) against the point mass."""
    if mixture.point_mass_weight in (0.0, 1.0):
        raise DegenerateHypothesisError(
            f"point mass weight {mixture.point_mass_weight} leaves only one hypothesis"
        )
    linked = log_marginal_continuous(data, mixture.continuous).log_marginal
    unlinked = log_likelihood(data, mixture.point_mass_location)
    if linked.is_zero and unlinked.is_zero:
        raise ArithmeticError("both hypotheses give the data probability zero")
    log_bf = linked.log - unlinked.log
    prior_odds = mixture.continuous_weight / mixture.point_mass_weight
    log_post = math.log(prior_odds) + log_bf
    if log_post >= 0:
        prob_linked = 1.0 / (1.0 + math.exp(-log_post))
    else:
        e = math.exp(log_post)
        prob_linked = e / (1.0 + e)
    mixture_marginal = log_sum_weighted(
        [(mixture.continuous_weight, linked), (mixture.point_mass_weight, unlinked)]
    )
    return TestResult(
        log_bayes_factor=log_bf,
        prior_odds=prior_odds,
        log_posterior_odds=log_post,
        posterior_odds=_safe_exp(log_post),
        posterior_prob_linked=prob_linked,
        log_marginal_linked=linked,
        log_likelihood_unlinked=unlinked,
        log_marginal_mixture=mixture_marginal,
    )


def posterior_density(data: CrossCount, prior: ContinuousPrior, rho, log_marginal: float = None):
    """Posterior density of rho under the continuous prior alone.

    ``rho`` may be a scalar or an array. Pass ``log_marginal`` to reuse a
    normalizer across calls.
    """
    _require_proper(prior)
    if log_marginal is None:
        log_marginal = log_marginal_continuous(data, prior).log_marginal.log
    r = np.asarray(rho, dtype=float)
    lo, hi = prior.support()
    log_prior = np.asarray(prior.log_density(r), dtype=float)
    log_lik = log_likelihood_array(data, r)
    with np.errstate(invalid="ignore"):
        log_post = log_lik + log_prior - log_marginal
    dens = np.where((r >= lo) & (r <= hi) & ~np.isnan(log_post), np.exp(log_post), 0.0)
    return float(dens) if np.ndim(dens) == 0 else dens


def mle(data: CrossCount) -> float:
    """Maximum likelihood rate y/N, clamped to the parameter space [0, 1/2]."""
    if data.n_meioses == 0:
        raise NoDataError("the MLE needs at least one meiosis")
    return min(data.n_crossovers / data.n_meioses, UNLINKED_RHO)
