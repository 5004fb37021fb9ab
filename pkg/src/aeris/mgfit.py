"""Mixture-Gamma representation of the per-element cascade ``W = G / Lt^2``.

With ``G ~ Gamma(m_G, Lambda_G)`` and ``Lt ~ Gamma(m_L, Lambda_L)``, the
density of ``W`` is an integral over ``Lt`` against a Gamma kernel.
Gauss-Laguerre quadrature in ``t = Lt / Lambda_L`` turns it into a finite
mixture of Gamma densities sharing the shape ``m_G``:

    f_W(y) = sum_k xi_k y^(m_G - 1) / Gamma(m_G) exp(-y / zeta_k)

    zeta_k = Lambda_G / (z_k Lambda_L)^2
    psi_k  = w_k / Gamma(m_L) z_k^(m_L - 1) / zeta_k^m_G
    xi_k   = psi_k / sum_i psi_i zeta_i^m_G

The last line renormalises the quadrature output to unit mass exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalInstabilityError, ParameterError
from .matching import GammaFit
from .specfun import QuadratureRule

__all__ = [
    "MixtureGamma",
    "build_mixture",
    "mixture_pdf",
    "mixture_laplace",
]


@dataclass(frozen=True, eq=False)
class MixtureGamma:
    """``sum_k xi_k y^(m-1)/Gamma(m) e^{-y/zeta_k}`` with common shape ``m``.

    ``weights`` are the ``xi_k``; ``probabilities`` are the component masses
    ``xi_k zeta_k^m`` (they sum to one).
    """

    shape: float
    weights: np.ndarray = field(repr=False)
    scales: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        s = np.array(self.scales, dtype=float)
        if w.shape != s.shape or w.ndim != 1 or w.size == 0:
            raise ParameterError("weights and scales must be equal-length 1-D arrays")
        if np.any(~(w > 0.0)) or np.any(~(s > 0.0)) or not np.all(np.isfinite(w * s)):
            raise NumericalInstabilityError("mixture weights and scales must be finite and positive")
        w.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "scales", s)
        p = np.exp(np.log(w) + self.shape * np.log(s))
        p.flags.writeable = False
        object.__setattr__(self, "_probabilities", p)

    @property
    def order(self) -> int:
        return self.weights.size

    @property
    def probabilities(self) -> np.ndarray:
        return self._probabilities

    @property
    def components(self):
        return list(zip(self.weights.tolist(), self.scales.tolist()))

    def mean(self) -> float:
        return float(self.shape * np.sum(self.probabilities * self.scales))

    def second_moment(self) -> float:
        m = self.shape
        return float(m * (m + 1.0) * np.sum(self.probabilities * self.scales**2))


def build_mixture(fit_g: GammaFit, fit_l: GammaFit, rule: QuadratureRule) -> MixtureGamma:
    """Mixture-Gamma approximation of ``W`` from the two moment fits."""
    m_g, lam_g = fit_g.shape, fit_g.scale
    m_l, lam_l = fit_l.shape, fit_l.scale
    z, w = rule.nodes, rule.weights
    log_zeta = math.log(lam_g) - 2.0 * (np.log(z) + math.log(lam_l))
    log_psi = np.log(w) - math.lgamma(m_l) + (m_l - 1.0) * np.log(z) - m_g * log_zeta
    log_mass = log_psi + m_g * log_zeta
    peak = np.max(log_mass)
    log_norm = peak + math.log(math.fsum(np.exp(log_mass - peak)))
    log_xi = log_psi - log_norm
    xi = np.exp(log_xi)
    zeta = np.exp(log_zeta)
    if not (np.all(np.isfinite(xi)) and np.all(xi > 0.0)):
        raise NumericalInstabilityError("mixture weights overflowed; reduce the quadrature order")
    return MixtureGamma(shape=m_g, weights=xi, scales=zeta)


def mixture_pdf(mg: MixtureGamma, y):
    """Mixture density at ``y > 0`` (vectorised)."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr > 0.0)):
        raise DomainError("mixture_pdf requires y > 0")
    m = mg.shape
    yy = y_arr[..., None]
    log_terms = (
        np.log(mg.weights) + (m - 1.0) * np.log(yy) - math.lgamma(m) - yy / mg.scales
    )
    out = np.exp(log_terms).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def mixture_laplace(mg: MixtureGamma, v):
    """``E[exp(-v W)] = sum_k xi_k (1/zeta_k + v)^(-m)`` for ``Re v >= 0``.

    Evaluated as ``sum_k p_k (1 + zeta_k v)^(-m)`` with ``p_k`` the component
    masses; both forms coincide on the principal branch because
    ``zeta_k > 0``.
    """
    v_arr = np.asarray(v, dtype=complex)
    if np.any(v_arr.real < 0.0):
        raise DomainError("mixture_laplace requires Re v >= 0")
    terms = (1.0 + v_arr[..., None] * mg.scales) ** (-mg.shape)
    out = terms @ mg.probabilities
    return complex(out) if out.ndim == 0 else out
