import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from ..aggregate import (advertiser_energy_inputs, charge_connection_interval_same_payload, connected_total_charge,
                         efficiency, expected_advertiser_charge, expected_advertiser_charge_exact,
                         expected_scanner_charge, goodput, payload_bytes)
from ..device_profile import DeviceProfile
from ..discovery import AdvScanParams, AlgoConfig, DiscoveryEstimate, DiscoveryMethod, estimate_discovery
from ..errors import ModelError, PreconditionError
from ..event_model import ConnectionParams, PacketExchange
from ..logger import log
from ..model_base.constants import MAX_PAYLOAD_BYTES, PACKET_OVERHEAD_BYTES, Role
from ..simulator import SimConfig, SimSummary, TrialOutcome, run_trials, summarize

Row = Dict[str, Any]


@dataclass
class Action(ABC):
    user_callback: Optional[Callable[[Any], None]]
    index: int
    completed: bool = field(init=False)
    result: Optional[Exception] = field(init=False)

    def __post_init__(self):
        self.completed = False
        self.result = None

    def run(self) -> None:
        try:
            self.action()
        except ModelError as e:
            log.debug(f'{type(self).__name__} #{self.index} failed: {e}')
            self.result = e
        except Exception as e:
            # the worker thread must still report completion
            log.exception(f'{type(self).__name__} #{self.index} crashed')
            self.result = e

    @abstractmethod
    def action(self):
        ...


@dataclass
class ConnectedPointAction(Action):
    profile: DeviceProfile
    role: Role
    T_c: float
    pairs: int
    rx_bytes: int
    tx_bytes: int
    tx_power: float = 3.0
    N_sl_avg: float = 0.0
    T_g: Optional[float] = None
    overhead: int = PACKET_OVERHEAD_BYTES

    row: Row = field(default_factory=dict)

    def action(self) -> None:
        interval = charge_connection_interval_same_payload(self.profile, self.role, self.T_c, self.pairs,
                                                           self.rx_bytes, self.tx_bytes, self.tx_power,
                                                           self.N_sl_avg)
        exchange = PacketExchange.same_payload(self.pairs, self.rx_bytes, self.tx_bytes)
        payload = payload_bytes(exchange, self.overhead, MAX_PAYLOAD_BYTES)
        self.row = {
            'role': Role(self.role).value,
            'T_c_s': self.T_c,
            'pairs': self.pairs,
            'rx_bytes': self.rx_bytes,
            'tx_bytes': self.tx_bytes,
            'tx_dBm': self.tx_power,
            'slave_latency': self.N_sl_avg,
            'event_charge_C': interval.event.charge,
            'event_duration_s': interval.event.duration,
            'interval_charge_C': interval.charge,
            'mean_current_A': interval.mean_current,
            'goodput_Bps': goodput(payload, self.T_c),
            'efficiency_B_per_C': efficiency(payload, interval.charge),
        }
        if self.T_g is not None:
            params = ConnectionParams(T_c=self.T_c, role=self.role, N_sl_avg=self.N_sl_avg, tx_power=self.tx_power,
                                      sca_slave_ppm=self.profile.sca_ppm)
            self.row['total_charge_C'] = connected_total_charge(self.profile, params, exchange, self.T_g)


def _estimate_or_none(params: AdvScanParams, method: DiscoveryMethod, cfg: AlgoConfig) -> Optional[DiscoveryEstimate]:
    try:
        return estimate_discovery(params, method, cfg)
    except PreconditionError:
        return None


@dataclass
class DiscoveryPointAction(Action):
    profile: DeviceProfile
    params: AdvScanParams
    method: Optional[DiscoveryMethod] = None
    cfg: AlgoConfig = field(default_factory=AlgoConfig)
    compare: bool = False
    charges: bool = False

    estimate: Optional[DiscoveryEstimate] = None
    row: Row = field(default_factory=dict)

    def action(self) -> None:
        self.estimate = estimate = estimate_discovery(self.params, self.method, self.cfg)
        self.row = {
            'T_a_s': self.params.T_a0,
            'T_s_s': self.params.T_s,
            'd_s_s': self.params.d_s,
            'method': estimate.method.value,
            'd_adv_mean_s': estimate.d_adv_mean,
            'd_adv_max_s': '' if estimate.d_adv_max is None else estimate.d_adv_max,
            'aborted': int(estimate.aborted),
        }
        if self.compare:
            for method in (DiscoveryMethod.ALGORITHM, DiscoveryMethod.BOUNDED):
                other = _estimate_or_none(self.params, method, self.cfg)
                self.row[f'{method.value}_s'] = '' if other is None else other.d_adv_mean
        if self.charges:
            inputs = advertiser_energy_inputs(self.profile)
            exact = expected_advertiser_charge_exact(self.params, self.cfg, inputs)
            self.row.update({
                'Q_adv_C': expected_advertiser_charge(estimate.d_adv_mean, self.params.T_a0, inputs,
                                                      self.params.rho_max),
                'Q_adv_exact_C': exact.adv_charge_mean,
                'Q_scan_C': expected_scanner_charge(estimate.d_adv_mean, self.params.T_s, self.params.d_s,
                                                    self.profile),
            })


@dataclass
class SimulateChunkAction(Action):
    cfg: SimConfig
    first: int = 0
    count: Optional[int] = None

    outcomes: List[TrialOutcome] = field(default_factory=list)

    def action(self) -> None:
        self.outcomes = run_trials(self.cfg, self.first, self.count)


@dataclass
class VerifyPointAction(Action):
    sim: SimConfig
    tolerance: float = 0.10
    method: Optional[DiscoveryMethod] = None
    algo: AlgoConfig = field(default_factory=AlgoConfig)

    model: Optional[DiscoveryEstimate] = None
    summary: Optional[SimSummary] = None
    status: str = ''
    row: Row = field(default_factory=dict)

    def action(self) -> None:
        params = self.sim.params
        self.model = estimate_discovery(params, self.method, self.algo)
        self.summary = summarize(run_trials(self.sim))
        error = abs(self.model.d_adv_mean - self.summary.mean)
        relative = error / self.summary.mean if self.summary.mean > 0 else (0.0 if error == 0 else math.inf)
        if self.model.aborted:
            self.status = 'excluded'
            log.warning(f'verify point T_a={params.T_a0:g}, T_s={params.T_s:g}, d_s={params.d_s:g} '
                        f'hits a coupling and is excluded')
        else:
            self.status = 'pass' if relative <= self.tolerance else 'fail'
        self.row = {
            'T_a_s': params.T_a0,
            'T_s_s': params.T_s,
            'd_s_s': params.d_s,
            'method': self.model.method.value,
            'model_s': self.model.d_adv_mean,
            'sim_mean_s': self.summary.mean,
            'sim_stderr_s': self.summary.stderr,
            'relative_error': relative,
            'status': self.status,
        }
