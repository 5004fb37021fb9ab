"""Monte-Carlo outage estimation for the aerial-RIS link and relay baselines.

Per trial and element the four channel factors are drawn in the fixed
order ``(G_S, L_S, G_D, L_D)`` from standard Gamma variates with shapes
``(m_s, alpha_s, m_d, alpha_d)``; trials are processed in chunks of
``CHUNK_TRIALS``, chunk ``c`` drawing from ``RngHandle(seed).child(c)``.
Results therefore depend only on ``(config, trials, seed)``, not on the
worker count or on whether the numba or numpy kernel runs.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._jit import USE_NUMBA, njit, thread_count
from .analytic import SystemConfig
from .distributions import RngHandle
from .errors import ParameterError
from .matching import HopPairParams

__all__ = [
    "TrialBudget",
    "RelayScheme",
    "ChannelSums",
    "channel_sums",
    "snr_from_channels",
    "snr_with_phases",
    "simulate_ris_snr",
    "ris_snr_samples",
    "estimate_op",
    "op_curve",
    "relay_snr",
    "estimate_op_relay",
    "relay_op_curve",
    "compare_schemes",
]

CHUNK_TRIALS = 1 << 14


@dataclass(frozen=True)
class TrialBudget:
    trials: int
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {self.trials!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "seed", int(self.seed))


class RelayScheme(enum.Enum):
    """Relay baselines: N relays combine (MRC) and transmit (MRT) coherently."""

    HD_DF = "hd_df"
    HD_VG_AF = "hd_vg_af"
    FD_AF = "fd_af"
    FD_DF = "fd_df"

    @property
    def prelog(self) -> float:
        return 0.5 if self in (RelayScheme.HD_DF, RelayScheme.HD_VG_AF) else 1.0

    @property
    def amplify(self) -> bool:
        return self in (RelayScheme.HD_VG_AF, RelayScheme.FD_AF)


class ChannelSums(NamedTuple):
    """Per-trial sums over the N elements.

    ``coherent``: ``sum_r h_Sr h_rD``; ``power_s``: ``sum_r h_Sr^2``;
    ``power_d``: ``sum_r h_rD^2``; ``h = G L`` is the composite magnitude.
    """

    coherent: np.ndarray
    power_s: np.ndarray
    power_d: np.ndarray


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def _channel_sums_numba(gen, trials, n, shapes, cs, cd, bs, bd):
    coherent = np.empty(trials)
    power_s = np.empty(trials)
    power_d = np.empty(trials)
    ms, a_s, md, a_d = shapes[0], shapes[1], shapes[2], shapes[3]
    for t in range(trials):
        acc_w = 0.0
        acc_s = 0.0
        acc_d = 0.0
        for _ in range(n):
            g_s = gen.standard_gamma(ms)
            l_s = gen.standard_gamma(a_s)
            g_d = gen.standard_gamma(md)
            l_d = gen.standard_gamma(a_d)
            h_s = math.sqrt(g_s * cs) * (bs / l_s)
            h_d = math.sqrt(g_d * cd) * (bd / l_d)
            acc_w += h_s * h_d
            acc_s += h_s * h_s
            acc_d += h_d * h_d
        coherent[t] = acc_w
        power_s[t] = acc_s
        power_d[t] = acc_d
    return coherent, power_s, power_d


def _channel_sums_numpy(gen, trials, n, shapes, cs, cd, bs, bd):
    x = gen.standard_gamma(np.broadcast_to(shapes, (trials, n, 4)))
    h_s = np.sqrt(x[..., 0] * cs) * (bs / x[..., 1])
    h_d = np.sqrt(x[..., 2] * cd) * (bd / x[..., 3])
    # cumsum keeps the sequential summation order of the compiled kernel
    coherent = np.cumsum(h_s * h_d, axis=1)[:, -1]
    power_s = np.cumsum(h_s * h_s, axis=1)[:, -1]
    power_d = np.cumsum(h_d * h_d, axis=1)[:, -1]
    return coherent, power_s, power_d


def _kernel_args(hop: HopPairParams):
    s, d = hop.nakagami_s, hop.nakagami_d
    shapes = np.array([s.m, hop.ig_s.alpha, d.m, hop.ig_d.alpha], dtype=float)
    return shapes, s.omega / s.m, d.omega / d.m, hop.ig_s.beta, hop.ig_d.beta


def _run_kernel(gen, trials, n, hop, use_numba):
    kernel = _channel_sums_numba if use_numba else _channel_sums_numpy
    return kernel(gen, trials, n, *_kernel_args(hop))


def channel_sums(hop: HopPairParams, n: int, budget: TrialBudget, *, use_numba=None) -> ChannelSums:
    """Draw ``budget.trials`` channel realisations of an ``n``-element link."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"number of elements must be a positive integer, got {n!r}")
    n = int(n)
    use_numba = USE_NUMBA if use_numba is None else use_numba
    root = RngHandle(budget.seed)
    n_chunks = -(-budget.trials // CHUNK_TRIALS)
    sizes = [min(CHUNK_TRIALS, budget.trials - c * CHUNK_TRIALS) for c in range(n_chunks)]

    def work(c):
        return _run_kernel(root.child(c).generator, sizes[c], n, hop, use_numba)

    workers = min(thread_count(), n_chunks)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, range(n_chunks)))
    else:
        parts = [work(c) for c in range(n_chunks)]
    return ChannelSums(*(np.concatenate([p[i] for p in parts]) for i in range(3)))


# ---------------------------------------------------------------------------
# aerial RIS
# ---------------------------------------------------------------------------

def snr_from_channels(config: SystemConfig, h_s, h_d) -> float:
    """Receive SNR with the optimal phases ``phi_r = -(theta_Sr + theta_rD)``.

    The phases cancel, so the magnitudes add coherently:
    ``avg_snr kappa^2 (sum_r h_Sr h_rD)^2``.
    """
    total = float(np.sum(np.asarray(h_s, dtype=float) * np.asarray(h_d, dtype=float)))
    return config.avg_snr * config.kappa**2 * total * total


def snr_with_phases(config: SystemConfig, h_s, h_d, theta_s, theta_d, phi) -> float:
    """Receive SNR for an arbitrary RIS phase vector ``phi``."""
    field_sum = np.sum(np.asarray(h_s) * np.asarray(h_d) * np.exp(1j * (np.asarray(phi) + theta_s + theta_d)))
    return config.avg_snr * config.kappa**2 * abs(field_sum) ** 2


def simulate_ris_snr(config: SystemConfig, rng: RngHandle) -> float:
    """One realisation of the end-to-end SNR, drawn from ``rng``."""
    coherent, _, _ = _run_kernel(rng.generator, 1, config.n_elements, config.hop_params, USE_NUMBA)
    return config.avg_snr * config.kappa**2 * float(coherent[0]) ** 2


def ris_snr_samples(config: SystemConfig, budget: TrialBudget) -> np.ndarray:
    sums = channel_sums(config.hop_params, config.n_elements, budget)
    return config.avg_snr * config.kappa**2 * sums.coherent**2


def _estimate(snr, threshold):
    p = float(np.count_nonzero(snr < threshold)) / snr.size
    return p, math.sqrt(p * (1.0 - p) / snr.size)


def estimate_op(config: SystemConfig, budget: TrialBudget):
    """Fraction of trials with SNR below ``2^R_th - 1`` and its standard error."""
    return _estimate(ris_snr_samples(config, budget), config.gamma_th)


def op_curve(config: SystemConfig, gamma_db, budget: TrialBudget):
    """OP over an SNR grid; every grid point reuses the same channel draws.

    Returns ``(op, stderr)`` arrays. Each point equals :func:`estimate_op`
    at that SNR with the same budget.
    """
    sums = channel_sums(config.hop_params, config.n_elements, budget)
    s2 = sums.coherent**2
    ops, errs = [], []
    for g_db in np.atleast_1d(np.asarray(gamma_db, dtype=float)):
        snr = 10.0 ** (g_db / 10.0) * config.kappa**2 * s2
        p, e = _estimate(snr, config.gamma_th)
        ops.append(p)
        errs.append(e)
    return np.array(ops), np.array(errs)


# ---------------------------------------------------------------------------
# relays
# ---------------------------------------------------------------------------

def relay_snr(scheme: RelayScheme, gamma_1, gamma_2):
    """End-to-end SNR from the two hop SNRs (DF: min, variable-gain AF: harmonic form)."""
    gamma_1 = np.asarray(gamma_1, dtype=float)
    gamma_2 = np.asarray(gamma_2, dtype=float)
    if scheme.amplify:
        return gamma_1 * gamma_2 / (gamma_1 + gamma_2 + 1.0)
    return np.minimum(gamma_1, gamma_2)


def _relay_threshold(scheme, target_se):
    # prelog * log2(1 + snr) < R  <=>  snr < 2^(R / prelog) - 1
    return 2.0 ** (target_se / scheme.prelog) - 1.0


def _relay_estimate(scheme, sums, avg_snr, target_se):
    snr = relay_snr(scheme, avg_snr * sums.power_s, avg_snr * sums.power_d)
    return _estimate(snr, _relay_threshold(scheme, target_se))


def estimate_op_relay(scheme: RelayScheme, config: SystemConfig, budget: TrialBudget):
    """OP of an N-relay MRC/MRT baseline with the same per-channel fading.

    Hop SNRs are ``avg_snr sum_r h_Sr^2`` and ``avg_snr sum_r h_rD^2``;
    full-duplex relays are ideal (no residual self-interference).
    """
    sums = channel_sums(config.hop_params, config.n_elements, budget)
    return _relay_estimate(scheme, sums, config.avg_snr, config.target_se)


def relay_op_curve(scheme: RelayScheme, config: SystemConfig, gamma_db, budget: TrialBudget):
    sums = channel_sums(config.hop_params, config.n_elements, budget)
    res = [_relay_estimate(scheme, sums, 10.0 ** (g / 10.0), config.target_se)
           for g in np.atleast_1d(np.asarray(gamma_db, dtype=float))]
    return np.array([r[0] for r in res]), np.array([r[1] for r in res])


def compare_schemes(config: SystemConfig, gamma_db, budget: TrialBudget):
    """OP curves of the RIS and all four relay baselines on shared channel draws.

    Returns a dict mapping ``"ris"`` and each ``RelayScheme.value`` to
    ``(op, stderr)`` arrays.
    """
    sums = channel_sums(config.hop_params, config.n_elements, budget)
    grid = np.atleast_1d(np.asarray(gamma_db, dtype=float))
    out = {}
    s2 = sums.coherent**2
    ris = [_estimate(10.0 ** (g / 10.0) * config.kappa**2 * s2, config.gamma_th) for g in grid]
    out["ris"] = (np.array([r[0] for r in ris]), np.array([r[1] for r in ris]))
    for scheme in RelayScheme:
        res = [_relay_estimate(scheme, sums, 10.0 ** (g / 10.0), config.target_se) for g in grid]
        out[scheme.value] = (np.array([r[0] for r in res]), np.array([r[1] for r in res]))
    return out
