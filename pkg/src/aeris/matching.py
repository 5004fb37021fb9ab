"""Product-channel moments, exact PDFs and two-moment Gamma fits.

For one reflecting element the cascade magnitude is
``W = G_S G_D L_S L_D``. It is split as ``W = G / Lt^2`` with
``G = G_S G_D`` (product of Nakagami magnitudes) and
``Lt = 1/sqrt(L_S L_D)`` (inverse root of the shadowing product). Each
factor is replaced by a Gamma variable with the same first two moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import InverseGammaParams, NakagamiParams
from .errors import DegeneracyError, DomainError, ParameterError
from .specfun import bessel_k

__all__ = [
    "HopPairParams",
    "GammaFit",
    "moment_g_product",
    "moment_l_tilde",
    "exact_pdf_g_product",
    "exact_pdf_l_tilde",
    "fit_g_to_gamma",
    "fit_l_tilde_to_gamma",
]


@dataclass(frozen=True)
class HopPairParams:
    """Per-element parameters of the source-RIS (``_s``) and RIS-destination (``_d``) hops."""

    nakagami_s: NakagamiParams
    nakagami_d: NakagamiParams
    ig_s: InverseGammaParams
    ig_d: InverseGammaParams

    @classmethod
    def from_values(cls, m_s, m_d, omega_s, omega_d, alpha_s, alpha_d, beta_s, beta_d):
        return cls(
            NakagamiParams(m_s, omega_s),
            NakagamiParams(m_d, omega_d),
            InverseGammaParams(alpha_s, beta_s),
            InverseGammaParams(alpha_d, beta_d),
        )

    @classmethod
    def symmetric(cls, m, omega, alpha, beta):
        return cls.from_values(m, m, omega, omega, alpha, alpha, beta, beta)

    def swapped(self) -> "HopPairParams":
        return HopPairParams(self.nakagami_d, self.nakagami_s, self.ig_d, self.ig_s)

    @property
    def upsilon_g(self) -> float:
        s, d = self.nakagami_s, self.nakagami_d
        return (s.m * d.m) / (s.omega * d.omega)


@dataclass(frozen=True)
class GammaFit:
    """Gamma(shape, scale) matched to a target's first two moments."""

    shape: float
    scale: float
    matched_mean: float
    matched_second_moment: float

    @property
    def omega(self) -> float:
        return self.matched_mean

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def second_moment(self) -> float:
        return self.shape * (1.0 + self.shape) * self.scale**2


def _check_order(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"moment order must be a positive integer, got {n!r}")
    return int(n)


def moment_g_product(params: HopPairParams, n: int) -> float:
    """``E[(G_S G_D)^n] = Y^(-n/2) Gamma(m_s+n/2) Gamma(m_d+n/2) / (Gamma(m_s) Gamma(m_d))``
    with ``Y = m_s m_d / (Omega_s Omega_d)``."""
    n = _check_order(n)
    ms, md = params.nakagami_s.m, params.nakagami_d.m
    log_m = (
        math.lgamma(ms + 0.5 * n) + math.lgamma(md + 0.5 * n)
        - math.lgamma(ms) - math.lgamma(md)
        - 0.5 * n * math.log(params.upsilon_g)
    )
    return math.exp(log_m)


def moment_l_tilde(params: HopPairParams, n: int) -> float:
    """``E[(L_S L_D)^(-n/2)]``; finite for every ``n`` since ``1/L`` is Gamma."""
    n = _check_order(n)
    a_s, a_d = params.ig_s.alpha, params.ig_d.alpha
    log_m = (
        math.lgamma(a_s + 0.5 * n) + math.lgamma(a_d + 0.5 * n)
        - math.lgamma(a_s) - math.lgamma(a_d)
        - 0.5 * n * math.log(params.ig_s.beta * params.ig_d.beta)
    )
    return math.exp(log_m)


def _bessel_product_pdf(z, p_s, p_d, rate):
    # 4 rate^((p_s+p_d)/2) / (G(p_s) G(p_d)) z^(p_s+p_d-1) K_{p_d-p_s}(2 z sqrt(rate))
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr > 0.0)):
        raise DomainError("product PDF requires z > 0")
    root = math.sqrt(rate)
    log_c = (
        math.log(4.0) + 0.5 * (p_s + p_d) * math.log(rate)
        - math.lgamma(p_s) - math.lgamma(p_d)
    )
    flat = z_arr.ravel()
    out = np.empty_like(flat)
    for i, zi in enumerate(flat):
        arg = 2.0 * zi * root
        if arg > 700.0:
            out[i] = 0.0
            continue
        k = bessel_k(p_d - p_s, arg)
        out[i] = math.exp(log_c + (p_s + p_d - 1.0) * math.log(zi)) * k if k > 0.0 else 0.0
    out = out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def exact_pdf_g_product(params: HopPairParams, z):
    """Exact density of ``G_S G_D`` (Bessel-K form).

    The power of ``z`` is ``m_s + m_d - 1``; the symmetric derivation and the
    moment formula both require the two shapes to enter symmetrically.
    """
    return _bessel_product_pdf(z, params.nakagami_s.m, params.nakagami_d.m, params.upsilon_g)


def exact_pdf_l_tilde(params: HopPairParams, z):
    """Exact density of ``1/sqrt(L_S L_D)`` (Bessel-K form)."""
    rate = params.ig_s.beta * params.ig_d.beta
    return _bessel_product_pdf(z, params.ig_s.alpha, params.ig_d.alpha, rate)


def _moment_fit(mean, second):
    var = second - mean * mean
    if not var > 0.0:
        raise DegeneracyError(f"non-positive matched variance ({var:.3e})")
    shape = mean * mean / var
    return GammaFit(shape=shape, scale=mean / shape, matched_mean=mean, matched_second_moment=second)


def fit_g_to_gamma(params: HopPairParams) -> GammaFit:
    """Method-of-moments Gamma fit of ``G_S G_D``: shape ``m_G``, scale ``Omega_G / m_G``."""
    mean = moment_g_product(params, 1)
    second = params.nakagami_s.omega * params.nakagami_d.omega
    return _moment_fit(mean, second)


def fit_l_tilde_to_gamma(params: HopPairParams) -> GammaFit:
    """Method-of-moments Gamma fit of ``1/sqrt(L_S L_D)``: shape ``m_L``, scale ``Omega_L / m_L``."""
    mean = moment_l_tilde(params, 1)
    s, d = params.ig_s, params.ig_d
    second = (s.alpha * d.alpha) / (s.beta * d.beta)
    return _moment_fit(mean, second)
