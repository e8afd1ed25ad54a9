import math
import unittest

import numpy as np
from ddt import data, ddt, unpack

from ble_energy_model.aggregate import (AdvertiserEnergyInputs, HorizonSpec, advertiser_energy_inputs,
                                        charge_connection_interval_same_payload, connected_event_count,
                                        connected_total_charge, efficiency, expected_advertiser_charge,
                                        expected_advertiser_charge_exact, expected_advertising_events,
                                        expected_scanner_charge, goodput, idle_scan_charge, payload_bytes,
                                        renegotiation_break_even)
from ble_energy_model.device_profile import load_bundled_profile
from ble_energy_model.discovery import AdvScanParams, AlgoConfig, estimate_discovery
from ble_energy_model.errors import InfeasibleScheduleError, ParameterRangeError
from ble_energy_model.event_model import (ConnectionParams, PacketExchange, ScanMode, connection_event_cost,
                                          scan_event_cost)

PROFILE = load_bundled_profile()
I_SL = 0.9e-6


@ddt
class TestConnectedAggregate(unittest.TestCase):
    @data((1.0, 0.1, 'master', 0, 10), (1.0, 0.1, 'slave', 2, 5), (0.95, 0.1, 'master', 0, 9),
          (1.0, 0.1, 'slave', 0.5, 10), (0.05, 0.1, 'master', 0, 0))
    @unpack
    def test_event_count(self, T_g, T_c, role, N_sl, expected):
        self.assertEqual(connected_event_count(T_g, T_c, role, N_sl), expected)

    def test_horizon_shorter_than_interval(self):
        params = ConnectionParams(T_c=0.1, role='master')
        charge = connected_total_charge(PROFILE, params, PacketExchange.same_payload(1, 10, 10), 0.05)
        self.assertAlmostEqual(charge, 0.05 * I_SL, delta=1e-18)

    def test_identical_events(self):
        params = ConnectionParams(T_c=0.1, role='master')
        exchange = PacketExchange.same_payload(1, 10, 10)
        event = connection_event_cost(PROFILE, params, exchange)
        charge = connected_total_charge(PROFILE, params, exchange, 1.0)
        self.assertAlmostEqual(charge, 10 * event.charge + (1.0 - 10 * event.duration) * I_SL, delta=1e-15)

    def test_cycling_exchanges(self):
        params = ConnectionParams(T_c=0.1, role='slave')
        exchanges = [PacketExchange.same_payload(1, 0, 37), PacketExchange.same_payload(2, 0, 17)]
        first, second = (connection_event_cost(PROFILE, params, e) for e in exchanges)
        charge = connected_total_charge(PROFILE, params, exchanges, 1.0)
        busy = 5 * (first.duration + second.duration)
        self.assertAlmostEqual(charge, 5 * (first.charge + second.charge) + (1.0 - busy) * I_SL, delta=1e-15)

    def test_no_exchanges(self):
        with self.assertRaises(ParameterRangeError):
            connected_total_charge(PROFILE, ConnectionParams(T_c=0.1), [], 1.0)

    def test_events_longer_than_horizon(self):
        params = ConnectionParams(T_c=7.5e-3, role='master')
        with self.assertRaises(InfeasibleScheduleError):
            connected_total_charge(PROFILE, params, PacketExchange.same_payload(8, 37, 37), 1.0)

    def test_event_longer_than_interval(self):
        with self.assertRaises(InfeasibleScheduleError):
            charge_connection_interval_same_payload(PROFILE, 'master', 7.5e-3, 8, 37, 37)

    def test_interval_charge(self):
        interval = charge_connection_interval_same_payload(PROFILE, 'slave', 0.1, 5, 10, 20, 3)
        event = connection_event_cost(PROFILE, ConnectionParams(T_c=0.1), PacketExchange.same_payload(5, 10, 20))
        self.assertAlmostEqual(interval.charge, event.charge + (0.1 - event.duration) * I_SL, delta=1e-15)
        self.assertAlmostEqual(interval.mean_current, interval.charge / 0.1, delta=1e-15)
        self.assertEqual(interval.event.count_of('tx'), 5)

    def test_horizon_must_be_positive(self):
        with self.assertRaises(ParameterRangeError):
            HorizonSpec(0.0)

    @data(((5, 10, 20), 15), ((1, 0, 37), 20), ((1, 0, 10), 0), ((3, 0, 40), 60))
    @unpack
    def test_payload_bytes(self, exchange, expected):
        self.assertEqual(payload_bytes(PacketExchange.same_payload(*exchange)), expected)

    def test_goodput_and_efficiency(self):
        self.assertAlmostEqual(goodput(15, 0.1), 150.0, places=9)
        self.assertAlmostEqual(efficiency(15, 1e-5), 1.5e6, places=3)
        self.assertEqual(efficiency(15, 0.0), 0.0)

    def test_renegotiation_break_even(self):
        exchange = PacketExchange.same_payload(1, 0, 0)
        fast, slow = ConnectionParams(T_c=0.05), ConnectionParams(T_c=1.0)
        events = renegotiation_break_even(PROFILE, fast, slow, exchange)
        self.assertTrue(math.isfinite(events))
        self.assertGreaterEqual(events, 0.0)
        self.assertEqual(renegotiation_break_even(PROFILE, slow, fast, exchange), math.inf)


@ddt
class TestAdvertiserCharge(unittest.TestCase):
    inputs: AdvertiserEnergyInputs

    @classmethod
    def setUpClass(cls) -> None:
        cls.inputs = advertiser_energy_inputs(PROFILE)

    def test_inputs_ordering(self):
        inputs = self.inputs
        self.assertLess(inputs.Q_37, inputs.Q_38)
        self.assertLess(inputs.Q_38, inputs.Q_39)
        self.assertEqual(inputs.Q_39, inputs.Q_full)
        self.assertLess(inputs.d_37, inputs.d_39)

    def test_inputs_rejects_unordered_charges(self):
        with self.assertRaises(ParameterRangeError):
            AdvertiserEnergyInputs(Q_full=1.0, d_full=1.0, Q_37=2.0, Q_38=1.5, Q_39=1.0, d_37=0.1, d_38=0.2,
                                   d_39=0.3, I_sl=I_SL)

    def test_zero_latency(self):
        self.assertEqual(expected_advertiser_charge(0.0, 0.1, self.inputs), 0.0)

    def test_latency_of_one_event(self):
        inputs = self.inputs
        self.assertAlmostEqual(expected_advertiser_charge(inputs.d_last, 0.1, inputs), inputs.Q_last, delta=1e-15)

    def test_latency_within_first_interval(self):
        inputs = self.inputs
        expected = inputs.Q_last + (0.1 - inputs.d_last) * I_SL
        self.assertAlmostEqual(expected_advertiser_charge(0.1, 0.1, inputs), expected, delta=1e-15)
        self.assertAlmostEqual(expected_advertiser_charge(0.1 + 1e-9, 0.1, inputs), expected, delta=1e-12)

    def test_monotonic_in_latency(self):
        charges = [expected_advertiser_charge(d, 0.1, self.inputs) for d in np.linspace(0.0, 5.0, 501)]
        self.assertTrue(all(b >= a for a, b in zip(charges, charges[1:])))

    def test_expected_events(self):
        self.assertAlmostEqual(expected_advertising_events(1.05, 0.1), 9.0, places=9)
        self.assertEqual(expected_advertising_events(0.05, 0.1), 0.0)

    def test_negative_latency(self):
        with self.assertRaises(ParameterRangeError):
            expected_advertiser_charge(-1.0, 0.1, self.inputs)

    @data((0.64, 0.02), (0.64, 0.03), (0.64, 0.05), (1.28, 0.02), (1.28, 0.03))
    @unpack
    def test_exact_charge_close_to_approximation(self, d_s, T_a):
        params = AdvScanParams(T_a0=T_a, T_s=3.12, d_s=d_s)
        exact = expected_advertiser_charge_exact(params, AlgoConfig(), self.inputs)
        assert exact.adv_charge_mean is not None
        approximate = expected_advertiser_charge(exact.d_adv_mean, T_a, self.inputs)
        self.assertAlmostEqual(exact.adv_charge_mean, approximate, delta=0.10 * approximate)


@ddt
class TestScannerCharge(unittest.TestCase):
    def test_zero_latency(self):
        self.assertEqual(expected_scanner_charge(0.0, 3.12, 1.28, PROFILE), 0.0)

    def test_continuous_scanning(self):
        idle = scan_event_cost(PROFILE, ScanMode.PASSIVE_OR_IDLE, 1.0)
        self.assertAlmostEqual(expected_scanner_charge(0.5, 1.0, 1.0, PROFILE), 0.5 * idle.charge, delta=1e-15)

    def test_idle_period(self):
        idle = scan_event_cost(PROFILE, ScanMode.PASSIVE_OR_IDLE, 1.28)
        self.assertAlmostEqual(idle_scan_charge(3.12, 3.12, 1.28, PROFILE), idle.charge + 1.84 * I_SL,
                               delta=1e-15)

    @data(0.1, 0.5, 1.0)
    def test_scanner_pays_more_than_advertiser(self, T_a):
        params = AdvScanParams.from_profile(PROFILE, T_a0=T_a, T_s=3.12, d_s=1.28)
        d_adv = estimate_discovery(params).d_adv_mean
        advertiser = expected_advertiser_charge(d_adv, T_a, advertiser_energy_inputs(PROFILE))
        self.assertGreater(expected_scanner_charge(d_adv, 3.12, 1.28, PROFILE), advertiser)

    def test_negative_idle_time(self):
        with self.assertRaises(ParameterRangeError):
            idle_scan_charge(-0.1, 3.12, 1.28, PROFILE)


if __name__ == '__main__':
    unittest.main()
