import math

import numpy as np
import pytest
from scipy import integrate, stats

from aeris.distributions import (
    GammaParams,
    InverseGammaParams,
    NakagamiParams,
    RngHandle,
    gamma_pdf,
    inverse_gamma_pdf,
    nakagami_pdf,
    sample_gamma,
    sample_inverse_gamma,
    sample_nakagami,
    sample_uniform_phase,
)
from aeris.errors import DomainError, ParameterError

# mpmath, 30 digits, direct density formulas and Gamma-ratio moments
NAKAGAMI_2_05_AT_08 = 1.26656086742302303830778939048
INVGAMMA_3_12_AT_05 = 1.25408498627283844665838077038
NAKAGAMI_MEAN_15_1 = 0.921317731923561  # Gamma(2)/Gamma(1.5) * sqrt(1/1.5)
INV_SQRT_L_MEAN_25_1 = 1.50450555612735  # Gamma(3)/Gamma(2.5)

N = 1_000_000


def draws(sampler, params, seed=11, size=N):
    return sampler(params, RngHandle(seed), size=size)


class TestParams:
    @pytest.mark.parametrize("m,omega", [(0.49, 1.0), (1.0, 0.0), (1.0, -1.0), (math.nan, 1.0)])
    def test_nakagami_invalid(self, m, omega):
        with pytest.raises(ParameterError):
            NakagamiParams(m, omega)

    @pytest.mark.parametrize("alpha,beta", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.0)])
    def test_inverse_gamma_invalid(self, alpha, beta):
        with pytest.raises(ParameterError):
            InverseGammaParams(alpha, beta)

    @pytest.mark.parametrize("shape,scale", [(0.0, 1.0), (1.0, 0.0)])
    def test_gamma_invalid(self, shape, scale):
        with pytest.raises(ParameterError):
            GammaParams(shape, scale)


class TestDensities:
    def test_rayleigh_case(self):
        assert nakagami_pdf(NakagamiParams(1, 1), 1.0) == pytest.approx(2 * math.exp(-1), rel=1e-14)

    def test_nakagami_oracle(self):
        assert nakagami_pdf(NakagamiParams(2, 0.5), 0.8) == pytest.approx(NAKAGAMI_2_05_AT_08, rel=1e-13)

    def test_inverse_gamma_unit(self):
        assert inverse_gamma_pdf(InverseGammaParams(2, 1), 1.0) == pytest.approx(math.exp(-1), rel=1e-14)

    def test_inverse_gamma_oracle(self):
        assert inverse_gamma_pdf(InverseGammaParams(3, 1.2), 0.5) == pytest.approx(INVGAMMA_3_12_AT_05, rel=1e-13)

    def test_gamma_matches_scipy(self):
        x = np.linspace(0.01, 10, 50)
        ref = stats.gamma.pdf(x, 2.7, scale=0.6)
        assert np.allclose(gamma_pdf(GammaParams(2.7, 0.6), x), ref, rtol=1e-12)

    @pytest.mark.parametrize(
        "pdf,params",
        [(nakagami_pdf, NakagamiParams(1, 1)), (inverse_gamma_pdf, InverseGammaParams(2.5, 1)),
         (gamma_pdf, GammaParams(0.7, 2.0))],
    )
    def test_normalised(self, pdf, params):
        total, _ = integrate.quad(lambda x: pdf(params, x), 0, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("pdf,params", [(nakagami_pdf, NakagamiParams(1, 1)), (inverse_gamma_pdf, InverseGammaParams(2, 1))])
    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, pdf, params, x):
        with pytest.raises(DomainError):
            pdf(params, x)

    def test_vectorised(self):
        x = np.array([0.2, 0.5, 1.5])
        out = nakagami_pdf(NakagamiParams(1.5, 2.0), x)
        assert out.shape == (3,)
        assert out[1] == nakagami_pdf(NakagamiParams(1.5, 2.0), 0.5)


class TestSamplers:
    def test_nakagami_unit_power(self):
        x = draws(sample_nakagami, NakagamiParams(1, 1))
        assert np.mean(x**2) == pytest.approx(1.0, abs=0.004)

    def test_nakagami_power(self):
        x = draws(sample_nakagami, NakagamiParams(2.5, 2))
        assert np.mean(x**2) == pytest.approx(2.0, abs=0.01)

    def test_nakagami_mean_oracle(self):
        x = draws(sample_nakagami, NakagamiParams(1.5, 1))
        assert abs(x.mean() - NAKAGAMI_MEAN_15_1) < 3 * x.std() / math.sqrt(N)

    @pytest.mark.parametrize("alpha,mean,tol", [(2, 1.0, 0.01), (3, 0.5, 0.005)])
    def test_inverse_gamma_mean(self, alpha, mean, tol):
        x = draws(sample_inverse_gamma, InverseGammaParams(alpha, 1))
        assert x.mean() == pytest.approx(mean, abs=tol)

    def test_inverse_sqrt_moment(self):
        y = 1 / np.sqrt(draws(sample_inverse_gamma, InverseGammaParams(2.5, 1)))
        assert abs(y.mean() - INV_SQRT_L_MEAN_25_1) < 3 * y.std() / math.sqrt(N)

    @pytest.mark.parametrize("shape,scale", [(1, 1), (4, 0.5)])
    def test_gamma_mean(self, shape, scale):
        x = draws(sample_gamma, GammaParams(shape, scale))
        assert x.mean() == pytest.approx(shape * scale, abs=0.003)

    def test_gamma_variance(self):
        x = draws(sample_gamma, GammaParams(0.3, 2))
        assert x.var() == pytest.approx(1.2, abs=0.02)

    def test_phase(self):
        th = sample_uniform_phase(RngHandle(5), size=N)
        assert th.min() >= 0 and th.max() < 2 * math.pi
        assert th.mean() == pytest.approx(math.pi, abs=0.006)
        assert np.mean(th < math.pi) == pytest.approx(0.5, abs=0.002)
        assert abs(np.cos(th).mean()) < 0.004 and abs(np.sin(th).mean()) < 0.004

    def test_scalar_draw(self):
        v = sample_gamma(GammaParams(2, 1), RngHandle(1))
        assert isinstance(v, float) and v > 0


class TestSamplerMatchesDensity:
    @pytest.mark.parametrize(
        "sampler,params,cdf",
        [
            (sample_nakagami, NakagamiParams(1.7, 0.8), lambda x: stats.nakagami.cdf(x, 1.7, scale=math.sqrt(0.8))),
            (sample_inverse_gamma, InverseGammaParams(2.5, 1.3), lambda x: stats.invgamma.cdf(x, 2.5, scale=1.3)),
            (sample_gamma, GammaParams(0.8, 1.5), lambda x: stats.gamma.cdf(x, 0.8, scale=1.5)),
        ],
    )
    def test_ks(self, sampler, params, cdf):
        x = draws(sampler, params, size=100_000)
        assert stats.kstest(x, cdf).pvalue > 0.01

    def test_ks_against_integrated_density(self):
        params = NakagamiParams(2.2, 1.4)
        grid = np.linspace(1e-6, 5, 4001)
        dens = nakagami_pdf(params, grid)
        cdf = integrate.cumulative_trapezoid(dens, grid, initial=0)
        x = draws(sample_nakagami, params, size=100_000)
        assert stats.kstest(x, lambda q: np.interp(q, grid, cdf)).pvalue > 0.01

    def test_nakagami_square_is_gamma(self):
        p = NakagamiParams(1.8, 2.4)
        sq = draws(sample_nakagami, p, size=100_000) ** 2
        g = draws(sample_gamma, GammaParams(p.m, p.omega / p.m), seed=99, size=100_000)
        assert stats.ks_2samp(sq, g).pvalue > 0.01


class TestRngHandle:
    def test_reproducible(self):
        a = sample_gamma(GammaParams(1.3, 1), RngHandle(42), size=1000)
        b = sample_gamma(GammaParams(1.3, 1), RngHandle(42), size=1000)
        assert np.array_equal(a, b)

    def test_children_independent_and_stable(self):
        root = RngHandle(7)
        a = root.child(0).generator.random(5)
        b = root.child(1).generator.random(5)
        assert not np.array_equal(a, b)
        assert np.array_equal(a, RngHandle(7).child(0).generator.random(5))
        assert np.array_equal(root.child(2).child(3).generator.random(3), RngHandle(7, (2, 3)).generator.random(3))

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(ParameterError):
            RngHandle(seed)
