"""Total charge over a horizon and expected charges of device discovery."""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Union

from .device_profile import DeviceProfile
from .discovery import AdvScanParams, AlgoConfig, DiscoveryEstimate, expected_discovery_charge
from .errors import InfeasibleScheduleError, ParameterRangeError
from .event_model import (ConnSetupParams, ConnectionParams, EventCost, PacketExchange, ScanMode, SetupKind,
                          advertising_event_cost, connection_event_cost, connection_setup_cost, scan_event_cost)
from .logger import log
from .model_base.constants import (ADV_PACKET_BYTES, CONNECT_REQUEST_BYTES, MAX_PAYLOAD_BYTES, PACKET_OVERHEAD_BYTES,
                                   RHO_MAX, Role)

_FLOOR_TOLERANCE = 1e-9


@dataclass(frozen=True)
class HorizonSpec:
    T_g: float

    def __post_init__(self) -> None:
        if self.T_g <= 0:
            raise ParameterRangeError('T_g', self.T_g, (0, None))


@dataclass(frozen=True)
class AdvertiserEnergyInputs:
    Q_full: float
    d_full: float
    Q_37: float
    Q_38: float
    Q_39: float
    d_37: float
    d_38: float
    d_39: float
    I_sl: float

    def __post_init__(self) -> None:
        if not self.Q_37 <= self.Q_38 <= self.Q_39:
            raise ParameterRangeError('Q_last', self.Q_38, (self.Q_37, self.Q_39), 'Q_37 <= Q_38 <= Q_39')
        if not self.d_37 <= self.d_38 <= self.d_39:
            raise ParameterRangeError('d_last', self.d_38, (self.d_37, self.d_39), 'd_37 <= d_38 <= d_39')

    @property
    def Q_last(self) -> float:
        return (self.Q_37 + self.Q_38 + self.Q_39) / 3

    @property
    def d_last(self) -> float:
        return (self.d_37 + self.d_38 + self.d_39) / 3

    def missed_event_charge(self, T_a: float) -> float:
        """A full event that was not received, plus the sleep until the next one."""
        return self.Q_full + (T_a - self.d_full) * self.I_sl


@dataclass(frozen=True)
class IntervalCharge:
    charge: float
    event: EventCost
    T_c: float

    @property
    def mean_current(self) -> float:
        return self.charge / self.T_c


def advertiser_energy_inputs(profile: DeviceProfile, adv_payload_bytes: int = ADV_PACKET_BYTES,
                             response_bytes: int = CONNECT_REQUEST_BYTES,
                             tx_power: float = 3.0) -> AdvertiserEnergyInputs:
    full = advertising_event_cost(profile, 3, False, response_bytes, adv_payload_bytes, tx_power)
    last: Dict[int, EventCost] = {
        channels: advertising_event_cost(profile, channels, True, response_bytes, adv_payload_bytes, tx_power)
        for channels in (1, 2)}
    return AdvertiserEnergyInputs(
        Q_full=full.charge, d_full=full.duration,
        Q_37=last[1].charge, Q_38=last[2].charge, Q_39=full.charge,
        d_37=last[1].duration, d_38=last[2].duration, d_39=full.duration,
        I_sl=profile.I_sl)


def connected_event_count(T_g: float, T_c: float, role: Union[Role, str] = Role.MASTER,
                          N_sl_avg: float = 0.0) -> int:
    """Connection events within ``T_g``.

    A slave divides by ``N_sl_avg * T_c``; averages below one are counted as
    one, so a slave that never skips matches the master.
    """
    if T_c <= 0:
        raise ParameterRangeError('T_c', T_c, (0, None))
    interval = T_c if Role(role) == Role.MASTER else max(N_sl_avg, 1.0) * T_c
    return max(int(math.floor(T_g / interval + _FLOOR_TOLERANCE)), 0)


def connected_total_charge(profile: DeviceProfile, params: ConnectionParams,
                           exchanges: Union[PacketExchange, Sequence[PacketExchange]], T_g: float) -> float:
    """Charge of all connection events in ``T_g`` plus sleep in between.

    ``exchanges`` is either one exchange used by every event or a sequence
    that events cycle through.
    """
    horizon = HorizonSpec(T_g)
    cycle = [exchanges] if isinstance(exchanges, PacketExchange) else list(exchanges)
    if not cycle:
        raise ParameterRangeError('exchanges', 0, (1, None))
    costs = [connection_event_cost(profile, params, exchange) for exchange in cycle]
    count = connected_event_count(horizon.T_g, params.T_c, params.role, params.N_sl_avg)
    events = [costs[n % len(costs)] for n in range(count)]
    busy = math.fsum(cost.duration for cost in events)
    if busy > horizon.T_g:
        raise InfeasibleScheduleError(f'{count} events need {busy:g} s, more than T_g={horizon.T_g:g} s')
    log.debug(f'{count} connection events in {horizon.T_g:g} s, busy {busy:g} s')
    return math.fsum(cost.charge for cost in events) + (horizon.T_g - busy) * profile.I_sl


def charge_connection_interval_same_payload(profile: DeviceProfile, role: Union[Role, str], T_c: float, pairs: int,
                                            rx_bytes: int, tx_bytes: int, tx_power: float = 3.0,
                                            N_sl_avg: float = 0.0) -> IntervalCharge:
    """Charge of one connection interval with ``pairs`` identical packet pairs."""
    params = ConnectionParams(T_c=T_c, role=Role(role), N_sl_avg=N_sl_avg, tx_power=tx_power,
                              sca_slave_ppm=profile.sca_ppm)
    event = connection_event_cost(profile, params, PacketExchange.same_payload(pairs, rx_bytes, tx_bytes))
    if event.duration > T_c:
        raise InfeasibleScheduleError(f'connection event takes {event.duration:g} s, longer than T_c={T_c:g} s')
    return IntervalCharge(event.charge + (T_c - event.duration) * profile.I_sl, event, T_c)


def payload_bytes(exchange: PacketExchange, overhead: int = PACKET_OVERHEAD_BYTES,
                  max_payload: int = MAX_PAYLOAD_BYTES) -> int:
    """Application bytes sent in ``exchange``, i.e. tx bytes without protocol overhead."""
    return sum(min(max(tx - overhead, 0), max_payload) for _, tx in exchange.pairs)


def goodput(payload_per_event: float, T_c: float) -> float:
    return payload_per_event / T_c


def efficiency(payload: float, charge: float) -> float:
    """Payload bytes per coulomb."""
    return payload / charge if charge > 0 else 0.0


def expected_advertising_events(d_adv_mean: float, T_a: float, rho_max: float = RHO_MAX) -> float:
    return max(d_adv_mean / (T_a + rho_max / 2) - 1, 0.0)


def expected_advertiser_charge(d_adv_mean: float, T_a: float, inputs: AdvertiserEnergyInputs,
                               rho_max: float = RHO_MAX) -> float:
    if d_adv_mean < 0:
        raise ParameterRangeError('d_adv_mean', d_adv_mean, (0, None))
    Q_last, d_last, I_sl = inputs.Q_last, inputs.d_last, inputs.I_sl
    if d_adv_mean <= d_last:
        return d_adv_mean / d_last * Q_last
    if d_adv_mean <= T_a:
        return Q_last + (d_adv_mean - d_last) * I_sl
    N_a = expected_advertising_events(d_adv_mean, T_a, rho_max)
    charge = N_a * inputs.Q_39 + Q_last + (d_adv_mean - N_a * T_a - d_last) * I_sl
    if N_a >= 1:
        charge += (N_a - 1) * (T_a - inputs.d_39) * I_sl
    return charge


def expected_advertiser_charge_exact(params: AdvScanParams, cfg: AlgoConfig,
                                     inputs: AdvertiserEnergyInputs) -> DiscoveryEstimate:
    """Advertiser charge accumulated inside the latency algorithm.

    The returned estimate carries the charge in ``adv_charge_mean`` together
    with the latency and the abort flag of the same run.
    """
    return expected_discovery_charge(params, cfg, inputs.missed_event_charge(params.T_a0),
                                     (inputs.Q_37, inputs.Q_38, inputs.Q_39))


def _scan_period_charge(T_s: float, d_s: float, profile: DeviceProfile) -> float:
    idle = scan_event_cost(profile, ScanMode.PASSIVE_OR_IDLE, d_s)
    return idle.charge + (T_s - d_s) * profile.I_sl


def expected_scanner_charge(d_adv_mean: float, T_s: float, d_s: float, profile: DeviceProfile) -> float:
    if d_adv_mean < 0:
        raise ParameterRangeError('d_adv_mean', d_adv_mean, (0, None))
    return d_adv_mean / T_s * _scan_period_charge(T_s, d_s, profile)


def idle_scan_charge(d_idle: float, T_s: float, d_s: float, profile: DeviceProfile) -> float:
    """Scanner charge spent listening before the advertiser starts."""
    if d_idle < 0:
        raise ParameterRangeError('d_idle', d_idle, (0, None))
    return d_idle / T_s * _scan_period_charge(T_s, d_s, profile)


def renegotiation_break_even(profile: DeviceProfile, old: ConnectionParams, new: ConnectionParams,
                             exchange: PacketExchange, setup: Optional[ConnSetupParams] = None) -> float:
    """Connection events on the new interval after which an update has paid off.

    Returns ``inf`` when the new parameters do not draw less average current.
    """
    if setup is None:
        setup = ConnSetupParams.typical(new.T_c, T_c_old=old.T_c)
    old_rate = _interval_charge(profile, old, exchange) / old.T_c
    new_rate = _interval_charge(profile, new, exchange) / new.T_c
    saving_per_event = (old_rate - new_rate) * new.T_c
    if saving_per_event <= 0:
        return math.inf
    update = connection_setup_cost(profile, setup, SetupKind.UPDATE, new.role, include_event=True,
                                   tx_power=new.tx_power)
    extra = update.charge - old_rate * update.duration
    return max(extra, 0.0) / saving_per_event


def _interval_charge(profile: DeviceProfile, params: ConnectionParams, exchange: PacketExchange) -> float:
    event = connection_event_cost(profile, params, exchange)
    return event.charge + (params.T_c - event.duration) * profile.I_sl
