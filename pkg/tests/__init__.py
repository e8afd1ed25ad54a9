"""Unit test package for ble_energy_model."""
