import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad, quad

from shadowlab.angular import AngularLaw, density, integrate_periodic
from shadowlab.errors import DomainError
from shadowlab.estimators import (
    BAYES_C,
    UNBIASED_C,
    LinearShadowEstimator,
    PosteriorLaw,
    bayes_risk,
    linear_estimate,
    minimize_bayes_risk,
    posterior_density,
    posterior_mean_numeric,
    posterior_normalization,
    shadow_mse,
)
from shadowlab.geometry import TWO_PI, PlanePoint
from shadowlab.montecarlo import RandomStream, estimate_shadow_risk


def mc_shadow_risk(c, rho, n=1_000_000, seed=99):
    return estimate_shadow_risk(PlanePoint(rho, 0.0), c, n, RandomStream(seed, int(1000 * rho) + 17))


class TestLinearEstimate:
    def test_unbiased(self):
        p = linear_estimate(LinearShadowEstimator(-2.0), 0.0)
        assert (p.x, p.y) == (-2.0, 0.0)

    def test_bayes(self):
        p = linear_estimate(LinearShadowEstimator(-0.25), math.pi)
        assert p.x == pytest.approx(0.25, abs=1e-16)
        assert p.y == pytest.approx(0.0, abs=1e-16)

    @given(st.floats(0.0, 10.0))
    def test_prior_guess(self, theta):
        p = LinearShadowEstimator(0.0)(theta)
        assert p.x == 0.0 and p.y == 0.0

    @given(st.floats(0.0, TWO_PI))
    def test_unbiased_is_two_away(self, theta):
        p = linear_estimate(LinearShadowEstimator(UNBIASED_C), theta)
        assert math.hypot(p.x, p.y) == pytest.approx(2.0, abs=1e-15)

    def test_non_finite_c(self):
        with pytest.raises(DomainError):
            LinearShadowEstimator(math.inf)

    @pytest.mark.parametrize("rho", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_unbiasedness_by_quadrature(self, rho):
        law = AngularLaw.at(rho, 0.0)
        ex = integrate_periodic(lambda t: -2.0 * np.cos(t) * density(law, t))
        ey = integrate_periodic(lambda t: -2.0 * np.sin(t) * density(law, t))
        assert ex == pytest.approx(rho, abs=1e-9)
        assert ey == pytest.approx(0.0, abs=1e-9)


class TestPosterior:
    def test_zero_at_center(self):
        assert posterior_density(PosteriorLaw(1.2), 0.0, 0.7) == 0.0

    def test_zero_at_shadow_on_boundary(self):
        assert posterior_density(PosteriorLaw(1.2), 1.0, 1.2) == 0.0

    def test_half_radius_opposite(self):
        theta = 0.9
        assert posterior_density(PosteriorLaw(theta), 0.5, theta + math.pi) == pytest.approx(0.75 / math.pi, abs=1e-15)

    def test_rho_domain(self):
        with pytest.raises(DomainError):
            posterior_density(PosteriorLaw(0.0), 1.5, 0.0)

    @pytest.mark.parametrize("theta", [0.0, 1.0, math.pi, 5.0])
    def test_normalization(self, theta):
        assert posterior_normalization(PosteriorLaw(theta)) == pytest.approx(1.0, abs=1e-9)

    def test_normalizing_constant_is_pi(self):
        # integrate the unnormalised joint slice by adaptive quadrature
        theta = 2.2
        const = dblquad(lambda r, f: (1 - r * math.cos(theta - f)) * r, 0.0, TWO_PI, 0.0, 1.0)[0]
        assert const == pytest.approx(math.pi, abs=1e-10)

    @pytest.mark.parametrize("theta", [0.0, math.pi / 2])
    def test_mean_examples(self, theta):
        m = posterior_mean_numeric(PosteriorLaw(theta), 512)
        assert m.x == pytest.approx(-math.cos(theta) / 4, abs=1e-6)
        assert m.y == pytest.approx(-math.sin(theta) / 4, abs=1e-6)

    def test_mean_against_adaptive_quadrature(self):
        theta = 1.0
        p = PosteriorLaw(theta)
        oracle = [
            dblquad(lambda r, f, k=k: r * (math.cos(f), math.sin(f))[k] * posterior_density(p, r, f), 0.0, TWO_PI, 0.0, 1.0,
                    epsabs=1e-12)[0]
            for k in (0, 1)
        ]
        m = posterior_mean_numeric(p, 512)
        assert m.x == pytest.approx(oracle[0], abs=1e-6)
        assert m.y == pytest.approx(oracle[1], abs=1e-6)
        assert oracle[0] == pytest.approx(-math.cos(1.0) / 4, abs=1e-6)

    def test_mean_against_monte_carlo(self):
        # rejection sampling from the posterior: uniform prior times the angle likelihood
        theta, n = 1.0, 400_000
        g = np.random.default_rng(7)
        r = np.sqrt(g.random(n))
        f = TWO_PI * g.random(n)
        keep = g.random(n) * 2.0 < 1.0 - r * np.cos(theta - f)
        x, y = (r * np.cos(f))[keep], (r * np.sin(f))[keep]
        se = max(x.std(), y.std()) / math.sqrt(keep.sum())
        m = posterior_mean_numeric(PosteriorLaw(theta), 512)
        assert abs(x.mean() - m.x) < 4 * se
        assert abs(y.mean() - m.y) < 4 * se

    def test_panels_minimum(self):
        with pytest.raises(DomainError):
            posterior_mean_numeric(PosteriorLaw(0.0), 4)


class TestRisk:
    @pytest.mark.parametrize("c, rho, expected", [(-2.0, 0.0, 4.0), (0.0, 0.5, 0.25), (-0.25, 0.5, 0.25)])
    def test_closed_form_examples(self, c, rho, expected):
        assert shadow_mse(c, rho) == pytest.approx(expected, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            shadow_mse(-2.0, 1.01)

    @pytest.mark.parametrize("c", [UNBIASED_C, BAYES_C, 0.0])
    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
    def test_closed_form_matches_monte_carlo(self, c, rho):
        est = mc_shadow_risk(c, rho)
        assert abs(est.mean - shadow_mse(c, rho)) <= 4 * est.std_error + 1e-12

    @given(st.floats(0.0, 1.0))
    def test_dominance(self, rho):
        gap = shadow_mse(UNBIASED_C, rho) - shadow_mse(BAYES_C, rho)
        # gap = 63/16 - (7/4) rho^2, smallest at rho = 1
        assert gap >= 2.1875 - 1e-12

    @pytest.mark.parametrize("c, expected", [(0.0, 0.5), (-0.25, 0.4375), (-2.0, 3.5)])
    def test_bayes_risk_values(self, c, expected):
        assert bayes_risk(c) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("c", [UNBIASED_C, BAYES_C, 0.0])
    def test_bayes_risk_is_prior_average(self, c):
        avg = quad(lambda r: shadow_mse(c, r) * 2 * r, 0.0, 1.0)[0]
        assert bayes_risk(c) == pytest.approx(avg, abs=1e-9)

    @pytest.mark.parametrize("c", [UNBIASED_C, BAYES_C, 0.0])
    def test_bayes_risk_monte_carlo(self, c):
        # draw mu from the prior, X from the exact angle law
        n = 400_000
        g = np.random.default_rng(11)
        r, f = np.sqrt(g.random(n)), TWO_PI * g.random(n)
        u = g.random(n)
        # rejection from the uniform angle law; the density is at most 2 / (2 pi)
        theta = TWO_PI * g.random(n)
        accept = u * 2.0 < 1.0 - r * np.cos(theta - f)
        r, f, theta = r[accept], f[accept], theta[accept]
        loss = (c * np.cos(theta) - r * np.cos(f)) ** 2 + (c * np.sin(theta) - r * np.sin(f)) ** 2
        se = loss.std(ddof=1) / math.sqrt(loss.size)
        assert abs(loss.mean() - bayes_risk(c)) < 4 * se


class TestMinimize:
    def test_recovers_bayes_coefficient(self):
        c, risk = minimize_bayes_risk(-1.0, 0.0, 1e-3)
        assert c == -0.25
        assert risk == pytest.approx(0.4375, abs=1e-15)

    def test_single_point(self):
        assert minimize_bayes_risk(-0.25, -0.25, 1.0) == (-0.25, 0.4375)

    def test_increasing_region(self):
        assert minimize_bayes_risk(0.0, 1.0, 0.1)[0] == 0.0

    def test_tie_goes_to_smaller(self):
        # risk symmetric about -1/4: -0.5 and 0.0 tie
        assert minimize_bayes_risk(-0.5, 0.0, 0.5)[0] == -0.5

    @pytest.mark.parametrize("lo, hi, step", [(0.0, -1.0, 0.1), (0.0, 1.0, 0.0), (0.0, 1.0, -1.0)])
    def test_empty_grid(self, lo, hi, step):
        with pytest.raises(DomainError):
            minimize_bayes_risk(lo, hi, step)
