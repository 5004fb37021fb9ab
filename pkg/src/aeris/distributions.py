"""Channel distributions: Nakagami-m fading, inverse-Gamma shadowing, Gamma.

PDFs are vectorised over ``x``; samplers return a float when ``size`` is
None and an ndarray otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "NakagamiParams",
    "InverseGammaParams",
    "GammaParams",
    "RngHandle",
    "nakagami_pdf",
    "inverse_gamma_pdf",
    "gamma_pdf",
    "sample_nakagami",
    "sample_inverse_gamma",
    "sample_gamma",
    "sample_uniform_phase",
]

_U64 = 2**64


@dataclass(frozen=True)
class NakagamiParams:
    m: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m >= 0.5):
            raise ParameterError(f"Nakagami shape m must be >= 0.5, got {self.m}")
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise ParameterError(f"Nakagami spread omega must be > 0, got {self.omega}")


@dataclass(frozen=True)
class InverseGammaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        # alpha <= 1 has no mean; rejected rather than tolerated
        if not (math.isfinite(self.alpha) and self.alpha > 1.0):
            raise ParameterError(f"inverse-Gamma shape alpha must be > 1, got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise ParameterError(f"inverse-Gamma scale beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ParameterError(f"Gamma shape must be > 0, got {self.shape}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ParameterError(f"Gamma scale must be > 0, got {self.scale}")


class RngHandle:
    """Seeded random stream backed by numpy's PCG64.

    ``RngHandle(seed)`` always yields the same stream. Independent
    sub-streams for parallel work come from :meth:`child`, which extends the
    seed sequence's spawn key, so a child stream depends only on
    ``(seed, path)`` and never on how work is scheduled.
    """

    __slots__ = ("seed", "path", "generator")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed < _U64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngHandle":
        return RngHandle(self.seed, self.path + (int(index),))

    def __repr__(self):
        return f"RngHandle(seed={self.seed}, path={self.path})"


def _positive(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"{name} requires x > 0")
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def nakagami_pdf(params: NakagamiParams, x):
    """``2 (m/Omega)^m / Gamma(m) x^(2m-1) exp(-m x^2 / Omega)``."""
    x = _positive(x, "nakagami_pdf")
    m, om = params.m, params.omega
    log_pdf = (
        math.log(2.0) + m * math.log(m / om) - math.lgamma(m)
        + (2.0 * m - 1.0) * np.log(x) - m / om * x * x
    )
    return _out(np.exp(log_pdf))


def inverse_gamma_pdf(params: InverseGammaParams, x):
    """``beta^alpha / Gamma(alpha) x^(-alpha-1) exp(-beta / x)``."""
    x = _positive(x, "inverse_gamma_pdf")
    a, b = params.alpha, params.beta
    log_pdf = a * math.log(b) - math.lgamma(a) - (a + 1.0) * np.log(x) - b / x
    return _out(np.exp(log_pdf))


def gamma_pdf(params: GammaParams, x):
    """Gamma density with shape ``nu`` and scale ``zeta``."""
    x = _positive(x, "gamma_pdf")
    nu, zeta = params.shape, params.scale
    log_pdf = -nu * math.log(zeta) - math.lgamma(nu) + (nu - 1.0) * np.log(x) - x / zeta
    return _out(np.exp(log_pdf))


def sample_gamma(params: GammaParams, rng: RngHandle, size=None):
    return rng.generator.gamma(params.shape, params.scale, size)


def sample_nakagami(params: NakagamiParams, rng: RngHandle, size=None):
    """Nakagami-m draw via ``X = sqrt(Y)``, ``Y ~ Gamma(m, Omega/m)``."""
    y = rng.generator.gamma(params.m, params.omega / params.m, size)
    return np.sqrt(y)


def sample_inverse_gamma(params: InverseGammaParams, rng: RngHandle, size=None):
    """Inverse-Gamma draw via ``L = beta / Y``, ``Y ~ Gamma(alpha, 1)``."""
    y = rng.generator.standard_gamma(params.alpha, size)
    return params.beta / y


def sample_uniform_phase(rng: RngHandle, size=None):
    """Uniform phase on ``[0, 2 pi)``."""
    return 2.0 * math.pi * rng.generator.random(size)
