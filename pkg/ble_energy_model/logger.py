import logging

log = logging.getLogger("ble-energy-model")
