"""CDF of the coherent element sum and the resulting outage probability.

``Z = sum_{r=1}^N W_r`` with i.i.d. mixture-Gamma ``W_r``. Its CDF is the
inverse Laplace transform of ``(1/v) L_W(v)^N``. The production path
inverts that transform numerically; :func:`cdf_sum_multinomial` expands
the N-th power with the multinomial theorem and sums closed-form
Phi_2 terms, which is only tractable for small ``N`` and ``K`` and serves
as an independent check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import CapacityError, DomainError, ParameterError
from .matching import HopPairParams, fit_g_to_gamma, fit_l_tilde_to_gamma
from .mgfit import MixtureGamma, build_mixture, mixture_laplace
from .specfun import LaplaceTransform, gauss_laguerre, inverse_laplace_cdf, phi2_log

__all__ = [
    "SystemConfig",
    "system_mixture",
    "cdf_sum",
    "cdf_sum_multinomial",
    "cdf_z_squared",
    "outage_probability",
    "outage_curve",
    "weak_compositions",
]

MULTINOMIAL_MAX_N = 4
MULTINOMIAL_MAX_K = 3


@dataclass(frozen=True)
class SystemConfig:
    """One aerial-RIS scenario.

    ``avg_snr_db`` is the average transmit SNR in dB; ``target_se`` the
    spectral-efficiency target in b/s/Hz.
    """

    n_elements: int
    avg_snr_db: float
    target_se: float
    hop_params: HopPairParams
    kappa: float = 1.0
    quadrature_order: int = 30

    def __post_init__(self):
        if isinstance(self.n_elements, bool) or int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ParameterError(f"n_elements must be a positive integer, got {self.n_elements!r}")
        object.__setattr__(self, "n_elements", int(self.n_elements))
        if not (0.0 < self.kappa <= 1.0):
            raise ParameterError(f"kappa must lie in (0, 1], got {self.kappa}")
        if not (self.target_se > 0.0 and math.isfinite(self.target_se)):
            raise ParameterError(f"target_se must be positive, got {self.target_se}")
        if math.isnan(self.avg_snr_db) or self.avg_snr_db == math.inf:
            raise ParameterError(f"avg_snr_db must be a number below +inf, got {self.avg_snr_db}")

    @property
    def gamma_th(self) -> float:
        """SNR threshold ``2^R_th - 1``."""
        return 2.0**self.target_se - 1.0

    @property
    def avg_snr(self) -> float:
        return 10.0 ** (self.avg_snr_db / 10.0)

    def with_snr_db(self, gamma_db: float) -> "SystemConfig":
        return replace(self, avg_snr_db=float(gamma_db))


def system_mixture(hop: HopPairParams, quadrature_order: int = 30) -> MixtureGamma:
    """Fit both factors and build the K-component mixture for one element."""
    return build_mixture(fit_g_to_gamma(hop), fit_l_tilde_to_gamma(hop), gauss_laguerre(quadrature_order))


def _check_n(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"number of elements must be a positive integer, got {n!r}")
    return int(n)


def sum_transform(mg: MixtureGamma, n: int) -> LaplaceTransform:
    """``H(v) = (1/v) L_W(v)^n``, the transform of the CDF of the n-fold sum."""
    return LaplaceTransform(lambda v: mixture_laplace(mg, v) ** n / v, abscissa=0.0)


def cdf_sum(mg: MixtureGamma, n: int, z, *, tol: float = 1e-7):
    """CDF of ``Z = W_1 + ... + W_n`` at ``z > 0`` by numerical Laplace inversion.

    Vectorised over ``z``; values are clamped to ``[0, 1]``.
    """
    n = _check_n(n)
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr > 0.0)):
        raise DomainError("cdf_sum requires z > 0")
    return inverse_laplace_cdf(sum_transform(mg, n), z_arr if z_arr.ndim else float(z_arr), tol=tol)


@lru_cache(maxsize=64)
def _compositions(n, k):
    out = []
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(n + k - 2 - prev)
        out.append(tuple(parts))
    return tuple(out)


def weak_compositions(n: int, k: int):
    """All ``(t_1..t_k)`` of non-negative integers summing to ``n``."""
    return list(_compositions(int(n), int(k)))


def _log_multinomial(n, parts):
    return math.lgamma(n + 1) - sum(math.lgamma(t + 1) for t in parts)


def cdf_sum_multinomial(mg: MixtureGamma, n: int, z: float) -> float:
    """Closed-form CDF of the n-fold sum via the multinomial / Phi_2 expansion.

    ``F_Z(z) = z^(n m) / Gamma(n m + 1) sum_tau multinom(n; tau) prod xi_k^tau_k
    Phi_2(m tau_1, ..., m tau_K; n m + 1; -z/zeta_1, ..., -z/zeta_K)``

    Guarded to ``n <= 4`` and ``K <= 3``; the number of terms is
    ``C(n + K - 1, K - 1)``.
    """
    n = _check_n(n)
    k = mg.order
    if n > MULTINOMIAL_MAX_N or k > MULTINOMIAL_MAX_K:
        raise CapacityError(
            f"multinomial expansion is limited to n <= {MULTINOMIAL_MAX_N} and "
            f"K <= {MULTINOMIAL_MAX_K} (got n={n}, K={k})"
        )
    z = float(z)
    if not z > 0.0:
        raise DomainError("cdf_sum_multinomial requires z > 0")
    m = mg.shape
    big = n * m
    log_xi = np.log(mg.weights)
    args = [-z / s for s in mg.scales]
    log_pref = big * math.log(z) - math.lgamma(big + 1.0)
    log_terms = []
    for tau in _compositions(n, k):
        a = [m * t for t in tau]
        log_phi, _ = phi2_log(a, big + 1.0, args)
        log_terms.append(
            _log_multinomial(n, tau) + float(np.dot(tau, log_xi)) + log_pref + log_phi
        )
    peak = max(log_terms)
    total = peak + math.log(math.fsum(math.exp(t - peak) for t in log_terms))
    return min(1.0, max(0.0, math.exp(total)))


def cdf_z_squared(mg: MixtureGamma, n: int, x, *, tol: float = 1e-7):
    """CDF of ``Z^2``: ``F_{Z^2}(x) = F_Z(sqrt(x))``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0.0)):
        raise DomainError("cdf_z_squared requires x > 0")
    return cdf_sum(mg, n, np.sqrt(x_arr) if x_arr.ndim else math.sqrt(float(x_arr)), tol=tol)


def _outage_from_threshold(mg, n, x):
    # x = gamma_th / (avg_snr kappa^2); handles the degenerate ends exactly
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    zero = x <= 0.0
    inf = np.isinf(x)
    mid = ~(zero | inf)
    out[zero] = 0.0
    out[inf] = 1.0
    if np.any(mid):
        out[mid] = cdf_z_squared(mg, n, x[mid])
    return out


def outage_probability(config: SystemConfig) -> float:
    """Outage probability ``P(avg_snr kappa^2 Z^2 < 2^R_th - 1)``."""
    return float(outage_curve(config, [config.avg_snr_db])[0])


def outage_curve(config: SystemConfig, gamma_db) -> np.ndarray:
    """Outage probability over a grid of average SNRs (dB); other fields from ``config``."""
    mg = system_mixture(config.hop_params, config.quadrature_order)
    g = 10.0 ** (np.asarray(gamma_db, dtype=float) / 10.0)
    with np.errstate(divide="ignore"):
        x = config.gamma_th / (g * config.kappa**2)
    return _outage_from_threshold(mg, config.n_elements, np.atleast_1d(x))
