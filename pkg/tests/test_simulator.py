import math

import numpy as np
import pytest
from conftest import nominal_hop

from aeris import simulator
from aeris.analytic import SystemConfig, outage_curve, outage_probability
from aeris.distributions import RngHandle
from aeris.errors import ParameterError
from aeris.simulator import (
    CHUNK_TRIALS,
    RelayScheme,
    TrialBudget,
    channel_sums,
    compare_schemes,
    estimate_op,
    estimate_op_relay,
    op_curve,
    relay_op_curve,
    relay_snr,
    ris_snr_samples,
    simulate_ris_snr,
    snr_from_channels,
    snr_with_phases,
)

# centre geometry, N=20, R=5, m=2, alpha=2.5, beta=1 at -3 dB; 1e6 trials, seed 0.
# The analytic OP there is 0.0071612, within 0.7% of the pin.
PIN_OP = 0.007116


def config(gamma_db=5.0, n=20, rth=5.0, m=2.0, alpha=2.5, kappa=1.0):
    return SystemConfig(n, gamma_db, rth, nominal_hop(m=m, alpha=alpha), kappa=kappa)


class TestSnr:
    def test_kappa_scaling(self):
        a = simulate_ris_snr(config(kappa=0.5), RngHandle(3))
        b = simulate_ris_snr(config(kappa=1.0), RngHandle(3))
        assert a / b == pytest.approx(0.25, rel=1e-15)

    def test_unit_channels(self):
        cfg = config(gamma_db=7.0, n=1, kappa=0.8)
        assert snr_from_channels(cfg, [1.0], [1.0]) == pytest.approx(10**0.7 * 0.64, rel=1e-15)

    def test_amplitude_mean(self):
        hop = nominal_hop()
        sums = channel_sums(hop, 20, TrialBudget(1_000_000, seed=2))
        s, d = hop.nakagami_s, hop.nakagami_d
        g_mean = math.exp(math.lgamma(s.m + 0.5) - math.lgamma(s.m)) * math.sqrt(s.omega / s.m)
        g_mean *= math.exp(math.lgamma(d.m + 0.5) - math.lgamma(d.m)) * math.sqrt(d.omega / d.m)
        l_mean = hop.ig_s.beta / (hop.ig_s.alpha - 1) * hop.ig_d.beta / (hop.ig_d.alpha - 1)
        expect = 20 * g_mean * l_mean
        x = sums.coherent
        assert abs(x.mean() - expect) < 3 * x.std() / math.sqrt(x.size)

    def test_samples_match_sums(self):
        cfg = config(gamma_db=-2.0, kappa=0.9)
        b = TrialBudget(1000, seed=4)
        ref = 10**-0.2 * 0.81 * channel_sums(cfg.hop_params, 20, b).coherent ** 2
        assert np.array_equal(ris_snr_samples(cfg, b), ref)

    def test_optimal_phases_dominate(self):
        cfg = config(n=8)
        g = RngHandle(6).generator
        for _ in range(5):
            h_s, h_d = g.gamma(2.0, 1.0, 8), g.gamma(2.0, 1.0, 8)
            th_s, th_d = g.uniform(0, 2 * math.pi, 8), g.uniform(0, 2 * math.pi, 8)
            best = snr_from_channels(cfg, h_s, h_d)
            assert snr_with_phases(cfg, h_s, h_d, th_s, th_d, -(th_s + th_d)) == pytest.approx(best, rel=1e-12)
            for _ in range(1000):
                assert snr_with_phases(cfg, h_s, h_d, th_s, th_d, g.uniform(0, 2 * math.pi, 8)) <= best * (1 + 1e-12)


class TestEstimate:
    def test_zero_threshold_limit(self):
        # smallest representable rate gives gamma_th ~ 1e-300, below any draw
        op, se = estimate_op(config(rth=1e-300), TrialBudget(10_000))
        assert op == 0.0 and se == 0.0

    def test_zero_snr(self):
        op, se = estimate_op(config(-math.inf), TrialBudget(10_000))
        assert op == 1.0 and se == 0.0

    def test_regression_pin(self):
        cfg = config(-3.0)
        op, _ = estimate_op(cfg, TrialBudget(1_000_000, seed=0))
        assert op == PIN_OP
        assert abs(op / outage_probability(cfg) - 1) < 0.1

    def test_deterministic(self):
        b = TrialBudget(50_000, seed=77)
        assert estimate_op(config(-3.0), b) == estimate_op(config(-3.0), b)

    def test_consistent_across_budgets(self):
        cfg = config(-4.0)
        p1, s1 = estimate_op(cfg, TrialBudget(100_000, seed=1))
        p2, s2 = estimate_op(cfg, TrialBudget(1_000_000, seed=2))
        assert abs(p1 - p2) < 4 * math.hypot(s1, s2)

    def test_curve_matches_pointwise(self):
        b = TrialBudget(30_000, seed=3)
        grid = [-6.0, -3.0, 0.0]
        ops, errs = op_curve(config(), grid, b)
        for g, p, e in zip(grid, ops, errs):
            assert (p, e) == estimate_op(config(g), b)

    def test_matches_analytic(self):
        cfg = config(m=1.5, alpha=3.0)
        grid = np.arange(-10.0, 21.0, 2.0)
        mc, _ = op_curve(cfg, grid, TrialBudget(300_000, seed=8))
        ana = outage_curve(cfg, grid)
        keep = mc >= 1e-3
        assert np.all(np.abs(mc[keep] / ana[keep] - 1) < 0.1)

    def test_budget_validation(self):
        with pytest.raises(ParameterError):
            TrialBudget(0)
        with pytest.raises(ParameterError):
            TrialBudget(10, seed=-1)
        with pytest.raises(ParameterError):
            channel_sums(nominal_hop(), 0, TrialBudget(10))


class TestKernels:
    def test_numba_equals_numpy(self):
        hop = nominal_hop(m=1.7, alpha=2.2)
        b = TrialBudget(CHUNK_TRIALS + 123, seed=5)
        fast = channel_sums(hop, 7, b, use_numba=True)
        slow = channel_sums(hop, 7, b, use_numba=False)
        for x, y in zip(fast, slow):
            assert np.array_equal(x, y)

    def test_worker_count_independent(self, monkeypatch):
        hop = nominal_hop()
        b = TrialBudget(3 * CHUNK_TRIALS + 5, seed=9)
        monkeypatch.setenv("AERIS_THREADS", "1")
        one = channel_sums(hop, 5, b)
        monkeypatch.setenv("AERIS_THREADS", "4")
        four = channel_sums(hop, 5, b)
        for x, y in zip(one, four):
            assert np.array_equal(x, y)

    def test_chunks_are_prefix_stable(self):
        hop = nominal_hop()
        small = channel_sums(hop, 3, TrialBudget(CHUNK_TRIALS, seed=1))
        large = channel_sums(hop, 3, TrialBudget(2 * CHUNK_TRIALS, seed=1))
        assert np.array_equal(small.coherent, large.coherent[:CHUNK_TRIALS])

    def test_power_sums_bound_coherent(self):
        s = channel_sums(nominal_hop(), 10, TrialBudget(5000, seed=2))
        # Cauchy-Schwarz
        assert np.all(s.coherent**2 <= s.power_s * s.power_d * (1 + 1e-12))

    def test_numba_flag_default(self):
        assert isinstance(simulator.USE_NUMBA, bool)


class TestRelays:
    def test_prelogs(self):
        assert RelayScheme.HD_DF.prelog == RelayScheme.HD_VG_AF.prelog == 0.5
        assert RelayScheme.FD_DF.prelog == RelayScheme.FD_AF.prelog == 1.0

    def test_half_duplex_is_full_duplex_at_double_rate(self):
        b = TrialBudget(100_000, seed=12)
        for g in (-10.0, 0.0, 8.0):
            hd = estimate_op_relay(RelayScheme.HD_DF, config(g, rth=1.5), b)
            fd = estimate_op_relay(RelayScheme.FD_DF, config(g, rth=3.0), b)
            assert hd == fd

    def test_variable_gain_below_min(self):
        g = RngHandle(0).generator
        a, b = g.exponential(5.0, 100_000), g.exponential(5.0, 100_000)
        assert np.all(relay_snr(RelayScheme.HD_VG_AF, a, b) <= np.minimum(a, b))
        assert np.array_equal(relay_snr(RelayScheme.FD_DF, a, b), np.minimum(a, b))

    def test_compare_schemes_shares_draws(self):
        cfg = config(n=15, rth=1.0, m=1.5, alpha=3.0)
        grid = [-20.0, -15.0]
        b = TrialBudget(20_000, seed=4)
        out = compare_schemes(cfg, grid, b)
        assert set(out) == {"ris", "hd_df", "hd_vg_af", "fd_af", "fd_df"}
        assert np.array_equal(out["ris"][0], op_curve(cfg, grid, b)[0])
        assert np.array_equal(out["fd_df"][0], relay_op_curve(RelayScheme.FD_DF, cfg, grid, b)[0])

    def test_ris_beats_relays(self):
        cfg = config(n=15, rth=1.0, m=1.5, alpha=3.0)
        out = compare_schemes(cfg, np.arange(-30.0, 1.0, 2.0), TrialBudget(200_000, seed=6))
        ris = out["ris"][0]
        for key in ("hd_df", "hd_vg_af", "fd_af", "fd_df"):
            base = out[key][0]
            live = base >= 1e-4
            assert live.any() and np.all(ris[live] < base[live]), key
