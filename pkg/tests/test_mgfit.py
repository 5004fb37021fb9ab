import math

import numpy as np
import pytest
from conftest import cascade_draws, nominal_hop
from scipy import integrate

from aeris.analytic import system_mixture
from aeris.distributions import GammaParams, gamma_pdf
from aeris.errors import DomainError
from aeris.matching import fit_g_to_gamma, fit_l_tilde_to_gamma
from aeris.mgfit import MixtureGamma, build_mixture, mixture_laplace, mixture_pdf
from aeris.specfun import gauss_laguerre


def log_grid_integral(f, lo=-60.0, hi=60.0, points=40001):
    """Integral over (0, inf) by the substitution y = e^u; trapezoid in u."""
    u = np.linspace(lo, hi, points)
    y = np.exp(u)
    return integrate.trapezoid(f(y) * y, u)


class TestBuild:
    def test_single_node_collapses_to_gamma(self, hop_nominal):
        fg, fl = fit_g_to_gamma(hop_nominal), fit_l_tilde_to_gamma(hop_nominal)
        mg = build_mixture(fg, fl, gauss_laguerre(1))
        y = np.linspace(0.05, 30, 200)
        ref = gamma_pdf(GammaParams(fg.shape, fg.scale / fl.scale**2), y)
        assert np.allclose(mixture_pdf(mg, y), ref, rtol=1e-14, atol=0)

    @pytest.mark.parametrize("k", [10, 30])
    def test_normalised(self, hop_nominal, k):
        mg = system_mixture(hop_nominal, k)
        assert abs(mg.probabilities.sum() - 1.0) < 1e-14
        assert log_grid_integral(lambda y: mixture_pdf(mg, y)) == pytest.approx(1.0, abs=1e-8)

    def test_positive_components(self, hop_nominal):
        mg = system_mixture(hop_nominal, 30)
        assert mg.order == 30 and np.all(mg.weights > 0) and np.all(mg.scales > 0)
        assert len(mg.components) == 30

    def test_mean_close_to_cascade(self, hop_nominal):
        mg = system_mixture(hop_nominal, 30)
        w = cascade_draws(hop_nominal, 10_000_000, seed=8)
        numeric_mean = log_grid_integral(lambda y: y * mixture_pdf(mg, y))
        assert numeric_mean == pytest.approx(mg.mean(), rel=1e-8)
        assert abs(numeric_mean / w.mean() - 1) < 0.02

    def test_immutable(self, hop_nominal):
        mg = system_mixture(hop_nominal, 5)
        with pytest.raises(ValueError):
            mg.weights[0] = 1.0


class TestPdf:
    def test_vanishes_at_origin(self):
        mg = system_mixture(nominal_hop(m=2.5), 30)
        assert mg.shape > 1
        assert mixture_pdf(mg, 1e-12) < 1e-9

    def test_matches_histogram_near_mode(self, hop_nominal):
        mg = system_mixture(hop_nominal, 30)
        w = cascade_draws(hop_nominal, 10_000_000, seed=9)
        y = np.geomspace(0.05, 50, 4000)
        mode = y[np.argmax(mixture_pdf(mg, y))]
        for c in (0.8 * mode, mode, 1.25 * mode):
            h = 0.05 * mode
            est = np.mean(np.abs(w - c) < h) / (2 * h)
            assert mixture_pdf(mg, c) == pytest.approx(est, rel=0.05)

    def test_domain(self, hop_nominal):
        with pytest.raises(DomainError):
            mixture_pdf(system_mixture(hop_nominal, 5), 0.0)


class TestLaplace:
    def test_at_zero(self, hop_nominal):
        assert mixture_laplace(system_mixture(hop_nominal, 30), 0.0) == pytest.approx(1.0 + 0j, abs=1e-10)

    @pytest.mark.parametrize("v", [0.5, 1.0, 5.0])
    def test_matches_numerical_transform(self, hop_nominal, v):
        mg = system_mixture(hop_nominal, 30)
        num = log_grid_integral(lambda y: np.exp(-v * y) * mixture_pdf(mg, y))
        assert mixture_laplace(mg, v).real == pytest.approx(num, abs=1e-7)

    def test_spec_form_equivalent(self, hop_nominal):
        mg = system_mixture(hop_nominal, 30)
        v = np.array([0.3 + 2j, 4.0 - 1j, 0.0 + 10j])
        direct = ((1 / mg.scales + v[:, None]) ** (-mg.shape)) @ mg.weights
        assert np.allclose(mixture_laplace(mg, v), direct, rtol=1e-12)

    def test_bounded_by_one(self, hop_nominal):
        mg = system_mixture(hop_nominal, 30)
        re, im = np.meshgrid(np.linspace(0, 20, 41), np.linspace(-50, 50, 101))
        assert np.all(np.abs(mixture_laplace(mg, re + 1j * im)) <= 1 + 1e-12)

    def test_domain(self, hop_nominal):
        with pytest.raises(DomainError):
            mixture_laplace(system_mixture(hop_nominal, 5), -0.1)


def test_total_variation_shrinks_with_order(hop_nominal):
    def tv(k):
        a = system_mixture(hop_nominal, k)
        b = system_mixture(hop_nominal, 2 * k)
        return 0.5 * log_grid_integral(lambda y: np.abs(mixture_pdf(a, y) - mixture_pdf(b, y)))

    dists = [tv(k) for k in (5, 10, 20, 30)]
    assert all(b < a for a, b in zip(dists, dists[1:])), dists


def test_mixture_dataclass_rejects_bad_shapes():
    with pytest.raises(ValueError):
        MixtureGamma(1.0, np.ones(2), np.ones(3))
    with pytest.raises(ArithmeticError):
        MixtureGamma(1.0, np.array([1.0, -1.0]), np.ones(2))
    assert math.isclose(MixtureGamma(2.0, np.array([0.25]), np.array([2.0])).probabilities[0], 1.0)
