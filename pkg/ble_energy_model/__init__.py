"""Top-level package for the Bluetooth Low Energy energy model."""

__author__ = """Patrick Boettcher"""
__email__ = 'p@yai.se'
__version__ = '0.1.0'

from .aggregate import (AdvertiserEnergyInputs, HorizonSpec, IntervalCharge, advertiser_energy_inputs,
                        charge_connection_interval_same_payload, connected_event_count, connected_total_charge,
                        efficiency, expected_advertiser_charge, expected_advertiser_charge_exact,
                        expected_scanner_charge, goodput, idle_scan_charge, payload_bytes, renegotiation_break_even)
from .cli import main
from .device_profile import DeviceProfile, dump_profile, load_bundled_profile, load_profile, parse_profile, tx_current
from .discovery import (AdvScanParams, AlgoConfig, DiscoveryEstimate, DiscoveryMethod, estimate_discovery,
                        expected_discovery_latency, expected_discovery_latency_bounded,
                        expected_discovery_latency_continuous, max_latency_bounded, max_latency_continuous)
from .errors import (InfeasibleScheduleError, MissingVariationError, ModelError, ParameterRangeError,
                     PreconditionError, ProfileParseError, ProfileValidationError, UnknownTxPowerError)
from .event_model import (ConnSetupParams, ConnectionParams, EventCost, PacketExchange, ScanMode, SetupKind,
                          advertising_event_cost, connection_event_cost, connection_setup_cost, scan_event_cost,
                          window_widening)
from .model_base.constants import Role
from .sensitivity import SensitivityReport, brute_force_delta, current_sensitivity, duration_sensitivity
from .simulator import SimConfig, simulate_discovery, simulate_discovery_charge
from .utils.import_export import save_profile

__all__ = [
    'AdvScanParams', 'AdvertiserEnergyInputs', 'AlgoConfig', 'ConnSetupParams', 'ConnectionParams', 'DeviceProfile',
    'DiscoveryEstimate', 'DiscoveryMethod', 'EventCost', 'HorizonSpec', 'InfeasibleScheduleError', 'IntervalCharge',
    'MissingVariationError', 'ModelError', 'PacketExchange', 'ParameterRangeError', 'PreconditionError',
    'ProfileParseError', 'ProfileValidationError', 'Role', 'ScanMode', 'SensitivityReport', 'SetupKind', 'SimConfig',
    'UnknownTxPowerError', 'advertiser_energy_inputs', 'advertising_event_cost', 'brute_force_delta',
    'charge_connection_interval_same_payload', 'connected_event_count', 'connected_total_charge',
    'connection_event_cost', 'connection_setup_cost', 'current_sensitivity', 'dump_profile', 'duration_sensitivity',
    'efficiency', 'estimate_discovery', 'expected_advertiser_charge', 'expected_advertiser_charge_exact',
    'expected_discovery_latency', 'expected_discovery_latency_bounded', 'expected_discovery_latency_continuous',
    'expected_scanner_charge', 'goodput', 'idle_scan_charge', 'load_bundled_profile', 'load_profile', 'main',
    'max_latency_bounded', 'max_latency_continuous', 'parse_profile', 'payload_bytes', 'renegotiation_break_even',
    'save_profile', 'scan_event_cost', 'simulate_discovery', 'simulate_discovery_charge', 'tx_current',
    'window_widening',
]
