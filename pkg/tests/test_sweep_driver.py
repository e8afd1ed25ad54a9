import unittest
from unittest import mock

from ble_energy_model.device_profile import load_bundled_profile
from ble_energy_model.discovery import AdvScanParams
from ble_energy_model.errors import ParameterRangeError
from ble_energy_model.model_base.constants import Role
from ble_energy_model.simulator import SimConfig, run_trials
from ble_energy_model.sweep_driver.actions import (ConnectedPointAction, DiscoveryPointAction, SimulateChunkAction,
                                                   VerifyPointAction)
from ble_energy_model.sweep_driver import driver as driver_module
from ble_energy_model.sweep_driver.driver import SweepDriver, sweep_driver

PROFILE = load_bundled_profile()


def _connected(index, T_c, callback=None):
    return ConnectedPointAction(callback, index, PROFILE, Role.SLAVE, T_c, 1, 10, 20)


class TestSweepDriver(unittest.TestCase):
    def test_results_in_index_order(self):
        intervals = [0.01, 0.1, 1.0, 2.0, 0.05]
        actions = [_connected(index, T_c) for index, T_c in enumerate(intervals)]
        done = sweep_driver(2).run(reversed(actions))
        self.assertEqual([action.index for action in done], list(range(len(intervals))))
        self.assertEqual([action.row['T_c_s'] for action in done], intervals)
        self.assertTrue(all(action.completed and action.result is None for action in done))

    def test_callback_for_every_action(self):
        seen = []
        actions = [_connected(index, 0.1, seen.append) for index in range(4)]
        sweep_driver(2).run(actions)
        self.assertEqual(sorted(action.index for action in seen), [0, 1, 2, 3])

    def test_failure_is_kept(self):
        actions = [_connected(0, 0.1), _connected(1, 0.001)]
        done = sweep_driver(2).run(actions, raise_errors=False)
        self.assertIsNone(done[0].result)
        self.assertIsInstance(done[1].result, ParameterRangeError)

    def test_failure_is_raised(self):
        with self.assertRaises(ParameterRangeError):
            sweep_driver(2).run([_connected(0, 0.1), _connected(1, 0.001)])

    def test_worker_count_does_not_change_results(self):
        def rows(workers):
            actions = [_connected(index, 0.01 * (index + 1)) for index in range(6)]
            return [action.row for action in sweep_driver(workers).run(actions)]

        self.assertEqual(rows(1), rows(3))

    def test_empty_run(self):
        self.assertEqual(sweep_driver(2).run([]), [])

    def test_needs_a_worker(self):
        with self.assertRaises(ValueError):
            SweepDriver(0)

    def test_changing_workers_registers_no_exit_handler(self):
        with mock.patch('atexit.register') as register:
            sweep_driver(1)
            sweep_driver(3)
        register.assert_not_called()
        self.assertEqual(sweep_driver(3).worker_count, 3)

    def test_exit_handler_stops_current_driver(self):
        current = sweep_driver(2)
        with mock.patch.object(current, 'stop') as stop:
            driver_module._stop_driver()
        stop.assert_called_once_with()


class TestActions(unittest.TestCase):
    def test_chunks_equal_single_run(self):
        cfg = SimConfig(AdvScanParams(T_a0=0.5, T_s=3.12, d_s=1.28), trials=90, seed=21)
        chunks = [SimulateChunkAction(None, index, cfg, first, 30) for index, first in enumerate((0, 30, 60))]
        done = sweep_driver(3).run(chunks)
        outcomes = [outcome for action in done for outcome in action.outcomes]
        self.assertEqual(outcomes, run_trials(cfg))

    def test_discovery_row(self):
        params = AdvScanParams.from_profile(PROFILE, T_a0=0.5, T_s=3.12, d_s=1.28)
        action = DiscoveryPointAction(None, 0, PROFILE, params, compare=True, charges=True)
        action.run()
        self.assertIsNone(action.result)
        self.assertEqual(action.row['method'], 'bounded_closed_form')
        self.assertEqual(action.row['aborted'], 0)
        for column in ('algorithm1_s', 'bounded_closed_form_s', 'Q_adv_C', 'Q_adv_exact_C', 'Q_scan_C'):
            self.assertIn(column, action.row)

    def test_compare_outside_bounded_validity(self):
        params = AdvScanParams.from_profile(PROFILE, T_a0=2.0, T_s=3.12, d_s=1.28)
        action = DiscoveryPointAction(None, 0, PROFILE, params, compare=True)
        action.run()
        self.assertEqual(action.row['bounded_closed_form_s'], '')

    def test_total_charge_column(self):
        action = ConnectedPointAction(None, 0, PROFILE, Role.MASTER, 0.1, 1, 0, 37, T_g=10.0)
        action.run()
        self.assertGreater(action.row['total_charge_C'], 100 * action.row['event_charge_C'])

    def test_verify_pass(self):
        sim = SimConfig(AdvScanParams(T_a0=0.05, T_s=3.12, d_s=1.28), trials=2000, seed=1)
        action = VerifyPointAction(None, 0, sim)
        action.run()
        self.assertEqual(action.status, 'pass')
        self.assertLess(action.row['relative_error'], 0.10)

    def test_verify_excludes_coupled_point(self):
        sim = SimConfig(AdvScanParams(T_a0=2.56, T_s=2.56, d_s=0.01125), trials=10, seed=1, max_sim_time=100.0)
        action = VerifyPointAction(None, 0, sim)
        action.run()
        self.assertIsNone(action.result)
        self.assertEqual(action.status, 'excluded')


if __name__ == '__main__':
    unittest.main()
