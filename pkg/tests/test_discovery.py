import unittest

import numpy as np
from ddt import data, ddt, unpack

from ble_energy_model.device_profile import load_bundled_profile
from ble_energy_model.discovery import (AdvScanParams, AlgoConfig, DiscoveryMethod, adv_event_duration,
                                        bounded_latency_piecewise, channel_window, estimate_discovery,
                                        expected_discovery_charge, expected_discovery_latency,
                                        expected_discovery_latency_bounded, expected_discovery_latency_continuous,
                                        hit_probability, max_latency_bounded, max_latency_bounded_with_delay,
                                        max_latency_continuous, rho_sum_cdf, select_method)
from ble_energy_model.errors import ParameterRangeError, PreconditionError


@ddt
class TestChannelWindows(unittest.TestCase):
    @data((37, 0.0, 446e-6), (38, 596e-6, 1042e-6), (39, 1192e-6, 1638e-6))
    @unpack
    def test_offsets(self, ch, d_early, d_late):
        window = channel_window(ch, AdvScanParams(T_a0=0.1, T_s=1.0, d_s=0.5))
        self.assertAlmostEqual(window.d_early, d_early, delta=1e-15)
        self.assertAlmostEqual(window.d_late, d_late, delta=1e-15)
        self.assertAlmostEqual(window.d_s_eff, 0.5 - 446e-6, delta=1e-15)

    def test_event_duration_ends_with_channel(self):
        self.assertAlmostEqual(adv_event_duration(39, AdvScanParams(T_a0=0.1, T_s=1.0, d_s=0.5)), 1638e-6,
                               delta=1e-15)

    def test_unknown_channel(self):
        with self.assertRaises(ParameterRangeError):
            channel_window(40, AdvScanParams(T_a0=0.1, T_s=1.0, d_s=0.5))

    def test_from_profile(self):
        params = AdvScanParams.from_profile(load_bundled_profile(), T_a0=0.1, T_s=1.0, d_s=0.5)
        self.assertAlmostEqual(params.d_a, 446e-6, delta=1e-18)
        self.assertAlmostEqual(params.d_ch, 150e-6, delta=1e-18)

    @data(dict(T_a0=0.01, T_s=1.0, d_s=0.5), dict(T_a0=0.1, T_s=1.0, d_s=1.5), dict(T_a0=0.1, T_s=11.0, d_s=1.0),
          dict(T_a0=0.1, T_s=1.0, d_s=0.0))
    def test_invalid_params(self, kwargs):
        with self.assertRaises(ParameterRangeError):
            AdvScanParams(**kwargs)


@ddt
class TestRandomDelay(unittest.TestCase):
    @data((1, 5e-3), (2, 10e-3), (4, 20e-3), (30, 150e-3))
    @unpack
    def test_median(self, n, t):
        self.assertAlmostEqual(rho_sum_cdf(n, t), 0.5, places=12)

    def test_empty_sum_is_step(self):
        self.assertEqual(rho_sum_cdf(0, -1e-9), 0.0)
        self.assertEqual(rho_sum_cdf(0, 0.0), 1.0)

    @data(1, 2, 3, 10)
    def test_bounds_and_monotonic(self, n):
        t = np.linspace(-0.05, 0.15, 201)
        cdf = rho_sum_cdf(n, t)
        self.assertTrue(np.all(np.diff(cdf) >= 0))
        self.assertTrue(np.all((cdf >= 0) & (cdf <= 1)))

    def test_two_delays_triangular(self):
        self.assertAlmostEqual(rho_sum_cdf(2, 5e-3), 0.125, places=12)
        self.assertAlmostEqual(rho_sum_cdf(2, 15e-3), 0.875, places=12)

    def test_negative_count(self):
        with self.assertRaises(ParameterRangeError):
            rho_sum_cdf(-1, 0.0)

    def test_hit_probability(self):
        params = AdvScanParams(T_a0=0.1, T_s=1.0, d_s=0.5)
        window = channel_window(37, params)
        self.assertEqual(hit_probability(2, 0, 2.1, window, params.T_s, params.d_s), 1.0)
        self.assertEqual(hit_probability(2, 0, 1.9, window, params.T_s, params.d_s), 0.0)
        self.assertAlmostEqual(hit_probability(2, 1, 2.0 - 5e-3, window, params.T_s, params.d_s), 0.5, places=12)


@ddt
class TestContinuousScanning(unittest.TestCase):
    def test_mean_latency(self):
        estimate = expected_discovery_latency_continuous(AdvScanParams(T_a0=0.02, T_s=1.28, d_s=1.28))
        self.assertAlmostEqual(estimate.d_adv_mean, 1.053e-3, delta=0.005e-3)
        self.assertEqual(estimate.method, DiscoveryMethod.CONTINUOUS)

    def test_max_latency(self):
        self.assertAlmostEqual(max_latency_continuous(AdvScanParams(T_a0=0.02, T_s=1.28, d_s=1.28)), 21.638e-3,
                               delta=1e-12)

    def test_instant_without_air_time(self):
        params = AdvScanParams(T_a0=0.1, T_s=1.0, d_s=1.0, d_a=0.0, d_ch=0.0)
        self.assertEqual(expected_discovery_latency_continuous(params).d_adv_mean, 0.0)

    def test_needs_continuous_scanning(self):
        with self.assertRaises(PreconditionError):
            expected_discovery_latency_continuous(AdvScanParams(T_a0=0.02, T_s=1.28, d_s=1.0))


@ddt
class TestBoundedScanning(unittest.TestCase):
    def test_max_latency(self):
        self.assertAlmostEqual(max_latency_bounded(AdvScanParams(T_a0=0.5, T_s=3.12, d_s=1.28)), 2.001638,
                               delta=1e-9)

    def test_delay_bound_is_larger(self):
        params = AdvScanParams(T_a0=0.5, T_s=3.12, d_s=1.28)
        self.assertGreater(max_latency_bounded_with_delay(params), max_latency_bounded(params))
        # four intervals before the hit, each stretched by up to rho_max
        self.assertAlmostEqual(max_latency_bounded_with_delay(params), 4 * (0.5 + 0.01) + 1.638e-3, delta=1e-9)

    def test_interval_longer_than_window(self):
        with self.assertRaises(PreconditionError):
            expected_discovery_latency_bounded(AdvScanParams(T_a0=1.0, T_s=3.12, d_s=0.64))

    def test_continuous_is_not_bounded(self):
        with self.assertRaises(PreconditionError):
            expected_discovery_latency_bounded(AdvScanParams(T_a0=0.1, T_s=1.0, d_s=1.0))

    @data((0.5, 1.28), (0.2, 1.28), (0.1, 0.64), (0.3, 0.64))
    @unpack
    def test_closed_form_matches_piecewise(self, T_a, d_s):
        params = AdvScanParams(T_a0=T_a, T_s=3.12, d_s=d_s)
        closed = expected_discovery_latency_bounded(params).d_adv_mean
        self.assertAlmostEqual(closed, bounded_latency_piecewise(params), delta=0.02 * closed)

    def test_mean_below_max(self):
        params = AdvScanParams(T_a0=0.5, T_s=3.12, d_s=1.28)
        estimate = expected_discovery_latency_bounded(params)
        self.assertLess(estimate.d_adv_mean, estimate.d_adv_max)


@ddt
class TestAlgorithm(unittest.TestCase):
    @data(*[(T_a, 1.28) for T_a in (0.1, 0.2, 0.3, 0.5, 0.6, 0.8, 1.0)],
          *[(T_a, 0.64) for T_a in (0.1, 0.2, 0.3, 0.5, 0.6)])
    @unpack
    def test_matches_bounded_closed_form(self, T_a, d_s):
        params = AdvScanParams(T_a0=T_a, T_s=3.12, d_s=d_s)
        algorithm = expected_discovery_latency(params, AlgoConfig(delta=93.6e-3))
        closed = expected_discovery_latency_bounded(params)
        self.assertFalse(algorithm.aborted)
        self.assertAlmostEqual(algorithm.d_adv_mean, closed.d_adv_mean, delta=0.05 * closed.d_adv_mean)

    def test_long_window_discovers_within_one_interval(self):
        params = AdvScanParams(T_a0=0.1, T_s=3.0, d_s=2.9)
        estimate = expected_discovery_latency(params)
        self.assertLess(estimate.d_adv_mean, max_latency_continuous(params))

    def test_deterministic(self):
        params = AdvScanParams(T_a0=1.5, T_s=3.12, d_s=1.28)
        self.assertEqual(expected_discovery_latency(params), expected_discovery_latency(params))

    def test_offset_count(self):
        estimate = expected_discovery_latency(AdvScanParams(T_a0=1.5, T_s=3.12, d_s=1.28), AlgoConfig(delta=0.312))
        self.assertEqual(estimate.offsets, 30)

    def test_peak_at_coupled_intervals(self):
        profile = load_bundled_profile()

        def estimate(T_a):
            return estimate_discovery(AdvScanParams.from_profile(profile, T_a0=T_a, T_s=2.56, d_s=1.28))

        peak = estimate(2.56)
        # only the random delays (5 ms per event on average) move the advertiser across the
        # 1.28 s listening gap: about half the offsets need ~0.64 s / 5 ms events of 2.56 s
        self.assertFalse(peak.aborted)
        self.assertGreater(peak.d_adv_mean, 150.0)
        self.assertLess(peak.d_adv_mean, 190.0)
        for T_a in (2.36, 2.76):
            neighbour = estimate(T_a)
            self.assertLess(neighbour.d_adv_mean, 6.0)
            self.assertGreater(peak.d_adv_mean, 30 * neighbour.d_adv_mean)

    def test_coupling_aborts(self):
        estimate = expected_discovery_latency(AdvScanParams(T_a0=2.56, T_s=2.56, d_s=0.01125))
        self.assertTrue(estimate.aborted)
        self.assertGreater(estimate.aborted_offsets, 0)
        self.assertGreaterEqual(estimate.d_adv_mean, 0.5 * AlgoConfig().d_exp_max * estimate.aborted_offsets
                                / estimate.offsets)

    def test_charge_accumulation(self):
        params = AdvScanParams(T_a0=0.5, T_s=3.12, d_s=1.28)
        estimate = expected_discovery_charge(params, AlgoConfig(), 1.0, (0.0, 0.0, 0.0))
        latency = expected_discovery_latency(params)
        # one coulomb per missed event: charge counts the expected missed events
        assert estimate.adv_charge_mean is not None
        self.assertGreater(estimate.adv_charge_mean, 0.0)
        self.assertLess(estimate.adv_charge_mean, latency.d_adv_mean / params.T_a0 + 1)

    def test_charge_needs_three_channels(self):
        with self.assertRaises(ParameterRangeError):
            expected_discovery_charge(AdvScanParams(T_a0=0.5, T_s=3.12, d_s=1.28), AlgoConfig(), 1.0, (0.0, 0.0))

    @data(dict(epsilon=1.0), dict(delta=0.0), dict(d_exp_max=-1.0), dict(max_events=0))
    def test_invalid_config(self, kwargs):
        with self.assertRaises(ParameterRangeError):
            AlgoConfig(**kwargs)


@ddt
class TestDispatch(unittest.TestCase):
    @data(((0.1, 1.0, 1.0), DiscoveryMethod.CONTINUOUS), ((0.1, 3.12, 1.28), DiscoveryMethod.BOUNDED),
          ((2.0, 3.12, 1.28), DiscoveryMethod.ALGORITHM))
    @unpack
    def test_select(self, values, method):
        T_a, T_s, d_s = values
        params = AdvScanParams(T_a0=T_a, T_s=T_s, d_s=d_s)
        self.assertEqual(select_method(params), method)
        self.assertEqual(estimate_discovery(params).method, method)

    def test_forced_method(self):
        params = AdvScanParams(T_a0=0.5, T_s=3.12, d_s=1.28)
        self.assertEqual(estimate_discovery(params, 'algorithm1').method, DiscoveryMethod.ALGORITHM)

    def test_forced_method_outside_validity(self):
        with self.assertRaises(PreconditionError):
            estimate_discovery(AdvScanParams(T_a0=2.0, T_s=3.12, d_s=1.28), DiscoveryMethod.BOUNDED)


if __name__ == '__main__':
    unittest.main()
