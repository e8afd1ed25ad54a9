#!/usr/bin/env python3

import logging

from ble_energy_model import (AdvScanParams, advertiser_energy_inputs, charge_connection_interval_same_payload,
                              estimate_discovery, expected_advertiser_charge, load_bundled_profile)
from ble_energy_model.logger import log

if __name__ == "__main__":
    logging.basicConfig(level=logging.DEBUG)
    log.setLevel(logging.DEBUG)

    profile = load_bundled_profile()

    interval = charge_connection_interval_same_payload(profile, 'slave', 0.1, 5, 10, 20, 3)
    print(f'connection interval: {interval.charge * 1e6:.3f} uC, {interval.mean_current * 1e6:.1f} uA')

    params = AdvScanParams.from_profile(profile, T_a0=0.1, T_s=3.12, d_s=1.28)
    estimate = estimate_discovery(params)
    charge = expected_advertiser_charge(estimate.d_adv_mean, params.T_a0, advertiser_energy_inputs(profile))
    print(f'discovery ({estimate.method.value}): {estimate.d_adv_mean:.3f} s, advertiser {charge * 1e6:.1f} uC')
