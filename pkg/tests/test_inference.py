import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from linkagebf.exceptions import (
    DegenerateHypothesisError,
    ImproperPriorError,
    NoDataError,
    UnsupportedPriorError,
)
from linkagebf.inference import (
    bayes_factor_test,
    log_likelihood,
    log_marginal_continuous,
    marginal_approx_haldane,
    marginal_exact_haldane,
    mle,
    posterior_density,
)
from linkagebf.model import (
    CrossCount,
    FlatHaldane,
    HaldaneDistance,
    ImproperOneOverRho,
    ImproperOneOverRhoOneMinusRho,
    MixturePrior,
    ScaledBeta,
    primrose_mixture,
)
from linkagebf.numerics import integrate, reg_inc_beta

PRIMROSE = CrossCount(400, 160)
FLAT_12 = MixturePrior(11 / 12, FlatHaldane())

# Extended-precision values (exact rationals for the flat prior, 50-digit
# quadrature for the distance prior).
LOG_LIK_PRIMROSE_04 = -3.201772350325117160059668
LOG_LIK_PRIMROSE_HALF = -11.25597777060066652826478
LOG_FLAT_MARGINAL = -5.300844915169802084292819  # ln(2/401 * I_{1/2}(161, 241))
LOG_BF_FLAT = 5.955132855430864443971961
POSTERIOR_PROB_FLAT = 0.9722732054506247347090808
LOG_MIXTURE_MARGINAL_FLAT = -7.757633126508254155088888
LOG_HALDANE_MARGINAL = -5.473115747433269090967495
POSTERIOR_DENSITY_FLAT_04 = 16.31719966085843763453068


def exact_ibeta(x, a, b):
    n = a + b - 1
    return sum(Fraction(math.comb(n, j)) * x**j * (1 - x) ** (n - j) for j in range(a, n + 1))


class TestLikelihood:
    def test_trivial(self):
        assert log_likelihood(CrossCount(2, 1), 0.5).log == pytest.approx(math.log(0.5), rel=1e-15)
        assert log_likelihood(PRIMROSE, 0.0).is_zero
        assert log_likelihood(CrossCount(5, 0), 0.0).log == 0.0

    def test_primrose(self):
        oracle = mpmath.log(mpmath.binomial(400, 160) * mpmath.mpf("0.4") ** 160 * mpmath.mpf("0.6") ** 240)
        assert float(oracle) == pytest.approx(LOG_LIK_PRIMROSE_04, rel=1e-20)
        assert log_likelihood(PRIMROSE, 0.4).log == pytest.approx(LOG_LIK_PRIMROSE_04, rel=1e-13)
        assert log_likelihood(PRIMROSE, 0.5).log == pytest.approx(LOG_LIK_PRIMROSE_HALF, rel=1e-14)

    @pytest.mark.parametrize("n", [1, 7, 20, 60])
    @pytest.mark.parametrize("rho", [0.0, 0.013, 0.25, 0.4, 0.5])
    def test_normalizes_over_y(self, n, rho):
        total = math.fsum(log_likelihood(CrossCount(n, y), rho).value() for y in range(n + 1))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_large_n_does_not_overflow(self):
        ll = log_likelihood(CrossCount(10**6, 400_000), 0.4)
        assert math.isfinite(ll.log) and ll.log < 0


class TestClosedForms:
    def test_approx_primrose(self):
        res = marginal_approx_haldane(PRIMROSE, MixturePrior(11 / 12, FlatHaldane()))
        assert res.method == "approximation"
        assert res.value() == pytest.approx(1 / 2406, rel=1e-12)
        assert res.value() == pytest.approx(4.1562760e-4, rel=1e-7)

    def test_approx_empty(self):
        assert marginal_approx_haldane(CrossCount(0, 0), FLAT_12).value() == pytest.approx(1 / 6, rel=1e-14)

    def test_approx_two_one(self):
        assert marginal_approx_haldane(CrossCount(2, 1), FLAT_12).value() == pytest.approx(1 / 18, rel=1e-14)

    def test_approx_two_one_brute_force(self):
        # (1/12) * 2 * C(2,1) * integral of r(1 - r) over [0, 1], trapezoid
        r = np.linspace(0, 1, 200_001)
        brute = (1 / 12) * 2 * 2 * np.trapezoid(r * (1 - r), r)
        assert marginal_approx_haldane(CrossCount(2, 1), FLAT_12).value() == pytest.approx(brute, rel=1e-9)

    def test_exact_primrose(self):
        res = marginal_exact_haldane(PRIMROSE, FLAT_12)
        assert res.method == "closed_form"
        assert res.error_estimate == 0.0
        assert res.log_marginal.log == pytest.approx(LOG_FLAT_MARGINAL - math.log(12), rel=1e-13)
        assert res.value() < 1 / 2406
        assert res.value() == pytest.approx(reg_inc_beta(0.5, 161, 241) / 2406, rel=1e-12)

    def test_exact_empty(self):
        assert marginal_exact_haldane(CrossCount(0, 0), FLAT_12).value() == pytest.approx(1 / 12, rel=1e-14)

    def test_exact_two_two(self):
        assert marginal_exact_haldane(CrossCount(2, 2), FLAT_12).value() == pytest.approx(1 / 18 / 8, rel=1e-14)

    @pytest.mark.parametrize("fn", [marginal_exact_haldane, marginal_approx_haldane])
    def test_flat_only(self, fn):
        with pytest.raises(UnsupportedPriorError):
            fn(PRIMROSE, MixturePrior(11 / 12, HaldaneDistance()))

    def test_ratio_is_incomplete_beta(self):
        for n in range(0, 51):
            for y in range(0, n + 1):
                d = CrossCount(n, y)
                ratio = math.exp(
                    marginal_exact_haldane(d, FLAT_12).log_marginal.log
                    - marginal_approx_haldane(d, FLAT_12).log_marginal.log
                )
                oracle = float(exact_ibeta(Fraction(1, 2), y + 1, n - y + 1))
                assert ratio == pytest.approx(oracle, rel=1e-12)
                assert ratio <= 1.0
                if oracle < 1.0 - 1e-15:
                    assert ratio < 1.0

    def test_primrose_ratio_near_one(self):
        ratio = marginal_exact_haldane(PRIMROSE, FLAT_12).value() / marginal_approx_haldane(PRIMROSE, FLAT_12).value()
        assert 0.999 < ratio < 1.0


class TestQuadratureMarginal:
    def test_flat_matches_closed_form(self):
        quad = log_marginal_continuous(PRIMROSE, FlatHaldane())
        exact = marginal_exact_haldane(PRIMROSE, FLAT_12)
        assert quad.method == "quadrature"
        assert quad.value() * FLAT_12.continuous_weight == pytest.approx(exact.value(), rel=1e-10)
        assert quad.log_marginal.log == pytest.approx(LOG_FLAT_MARGINAL, rel=1e-12)

    @pytest.mark.parametrize("n,y", [(0, 0), (1, 0), (1, 1), (5, 2), (20, 20), (50, 3), (100, 49), (1000, 380)])
    def test_flat_matches_closed_form_grid(self, n, y):
        d = CrossCount(n, y)
        quad = log_marginal_continuous(d, FlatHaldane()).log_marginal.log
        exact = marginal_exact_haldane(d, MixturePrior(0.0, FlatHaldane())).log_marginal.log
        assert math.exp(quad - exact) == pytest.approx(1.0, rel=1e-10)

    @pytest.mark.parametrize("prior", [HaldaneDistance(1.0), HaldaneDistance(3.0), ScaledBeta(2, 7), FlatHaldane()], ids=repr)
    def test_no_data_gives_one(self, prior):
        assert log_marginal_continuous(CrossCount(0, 0), prior).value() == pytest.approx(1.0, abs=1e-12)

    def test_haldane_primrose(self):
        res = log_marginal_continuous(PRIMROSE, HaldaneDistance(1.0))
        assert res.log_marginal.log == pytest.approx(LOG_HALDANE_MARGINAL, rel=1e-12)
        assert res.error_estimate >= 0

    def test_haldane_primrose_against_mpmath(self):
        hi = (1 - mpmath.e ** -2) / 2

        def f(r):
            return mpmath.binomial(400, 160) * r**160 * (1 - r) ** 240 * (2 + mpmath.log(1 - 2 * r)) / (1 - 2 * r)

        with mpmath.workdps(30):
            oracle = mpmath.quad(f, [hi * k / 64 for k in range(65)])
        assert log_marginal_continuous(PRIMROSE, HaldaneDistance()).value() == pytest.approx(float(oracle), rel=1e-11)

    def test_large_n(self):
        d = CrossCount(10**6, 400_000)
        quad = log_marginal_continuous(d, FlatHaldane()).log_marginal.log
        exact = marginal_exact_haldane(d, MixturePrior(0.0, FlatHaldane())).log_marginal.log
        assert quad == pytest.approx(exact, rel=1e-10)
        # 2 / (N + 1) times I_{1/2}, which is 1 to double precision here.
        assert exact == pytest.approx(math.log(2 / (10**6 + 1)), rel=1e-12)

    @pytest.mark.parametrize("prior", [ImproperOneOverRho(), ImproperOneOverRhoOneMinusRho()])
    def test_improper_rejected(self, prior):
        with pytest.raises(ImproperPriorError):
            log_marginal_continuous(PRIMROSE, prior)


class TestBayesFactor:
    def test_no_data(self):
        for prior in (FlatHaldane(), HaldaneDistance()):
            res = bayes_factor_test(CrossCount(0, 0), MixturePrior(11 / 12, prior))
            assert res.log_bayes_factor == pytest.approx(0.0, abs=1e-12)
            assert res.posterior_odds == pytest.approx(res.prior_odds, rel=1e-12)

    def test_primrose_flat(self):
        res = bayes_factor_test(PRIMROSE, primrose_mixture())
        assert res.log_bayes_factor == pytest.approx(LOG_BF_FLAT, rel=1e-12)
        assert res.bayes_factor == pytest.approx(385.728153354035, rel=1e-11)
        assert res.prior_odds == pytest.approx(1 / 11, rel=1e-14)
        assert res.posterior_prob_linked == pytest.approx(POSTERIOR_PROB_FLAT, rel=1e-12)
        assert res.log_marginal_mixture.log == pytest.approx(LOG_MIXTURE_MARGINAL_FLAT, rel=1e-12)
        assert res.log_likelihood_unlinked.log == pytest.approx(LOG_LIK_PRIMROSE_HALF, rel=1e-14)

    def test_primrose_flat_closed_form_bf(self):
        # BF = 2 B(161, 241) I_{1/2}(161, 241) / 0.5^400 in extended precision
        with mpmath.workdps(40):
            bf = 2 * mpmath.beta(161, 241) * mpmath.betainc(161, 241, 0, 0.5, regularized=True) / mpmath.mpf(0.5) ** 400
            oracle = float(mpmath.log(bf))
        assert bayes_factor_test(PRIMROSE, primrose_mixture()).log_bayes_factor == pytest.approx(oracle, rel=1e-12)

    def test_haldane_prior_lowers_linked_marginal(self):
        flat = bayes_factor_test(PRIMROSE, primrose_mixture())
        dist = bayes_factor_test(PRIMROSE, primrose_mixture(HaldaneDistance()))
        assert dist.log_bayes_factor < flat.log_bayes_factor
        assert dist.log_marginal_linked.log == pytest.approx(LOG_HALDANE_MARGINAL, rel=1e-12)

    @pytest.mark.parametrize("prior", [FlatHaldane(), HaldaneDistance()], ids=repr)
    def test_invariant_to_point_mass_weight(self, prior):
        a = bayes_factor_test(PRIMROSE, MixturePrior(11 / 12, prior))
        b = bayes_factor_test(PRIMROSE, MixturePrior(0.5, prior))
        assert a.log_bayes_factor == b.log_bayes_factor
        assert a.posterior_odds != b.posterior_odds

    def test_odds_relations(self):
        res = bayes_factor_test(PRIMROSE, primrose_mixture())
        assert res.log_posterior_odds == math.log(res.prior_odds) + res.log_bayes_factor
        assert math.log(res.posterior_odds) == pytest.approx(res.log_posterior_odds, rel=1e-14)
        assert res.posterior_prob_linked == pytest.approx(res.posterior_odds / (1 + res.posterior_odds), rel=1e-14)

    @pytest.mark.parametrize("w", [0.0, 1.0])
    def test_degenerate(self, w):
        with pytest.raises(DegenerateHypothesisError):
            bayes_factor_test(PRIMROSE, MixturePrior(w, FlatHaldane()))

    def test_unlinked_point_mass_at_zero(self):
        # A point mass at rho = 0 cannot explain any crossover.
        res = bayes_factor_test(CrossCount(10, 3), MixturePrior(0.5, FlatHaldane(), point_mass_location=0.0))
        assert res.log_bayes_factor == math.inf
        assert res.posterior_prob_linked == 1.0


class TestPosterior:
    def test_no_data_is_prior(self):
        assert posterior_density(CrossCount(0, 0), FlatHaldane(), 0.3) == pytest.approx(2.0, rel=1e-12)

    def test_two_zero(self):
        d = CrossCount(2, 0)
        assert posterior_density(d, FlatHaldane(), 0.0) == pytest.approx(24 / 7, rel=1e-12)
        rho = np.linspace(0, 0.5, 11)
        np.testing.assert_allclose(posterior_density(d, FlatHaldane(), rho), 2 * (1 - rho) ** 2 / (7 / 12), rtol=1e-12)
        assert np.all(np.diff(posterior_density(d, FlatHaldane(), rho)) < 0)

    def test_primrose_flat(self):
        assert posterior_density(PRIMROSE, FlatHaldane(), 0.4) == pytest.approx(POSTERIOR_DENSITY_FLAT_04, rel=1e-11)

    def test_outside_support_is_zero(self):
        assert posterior_density(PRIMROSE, HaldaneDistance(), 0.45) == 0.0

    def test_normalizes_randomized(self):
        rng = np.random.default_rng(20261018)
        priors = [FlatHaldane(), HaldaneDistance(1.0), HaldaneDistance(0.5), ScaledBeta(2, 3), ScaledBeta(0.7, 1.4)]
        for _ in range(25):
            n = int(rng.integers(0, 101))
            y = int(rng.integers(0, n + 1))
            prior = priors[int(rng.integers(len(priors)))]
            d = CrossCount(n, y)
            lm = log_marginal_continuous(d, prior).log_marginal.log
            lo, hi = prior.support()
            total = integrate(lambda r: posterior_density(d, prior, r, log_marginal=lm), lo, hi, rel_tol=1e-10)
            assert total.value == pytest.approx(1.0, abs=1e-6), (n, y, prior)

    def test_improper_rejected(self):
        with pytest.raises(ImproperPriorError):
            posterior_density(PRIMROSE, ImproperOneOverRho(), 0.3)


class TestMle:
    def test_primrose(self):
        assert mle(PRIMROSE) == 0.4

    def test_zero(self):
        assert mle(CrossCount(10, 0)) == 0.0

    def test_clamped(self):
        assert mle(CrossCount(10, 9)) == 0.5

    def test_no_data(self):
        with pytest.raises(NoDataError):
            mle(CrossCount(0, 0))
