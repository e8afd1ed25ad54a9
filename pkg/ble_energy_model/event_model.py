"""Charge and duration of single protocol events.

Every event is built as a list of :class:`Segment` objects (one per phase of
the current waveform) and summed. A segment is either a phase with a duration
and an effective current, or a pure charge offset without duration.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Tuple, Union

from .device_profile import ConnectedPhaseTable, DeviceProfile, tx_current
from .errors import ParameterRangeError, PreconditionError
from .logger import log
from .model_base.constants import (ADV_PACKET_BYTES, CONNECT_REQUEST_BYTES, CONNECTION_UPDATE_BYTES, N_SL_MAX,
                                   T_C_MAX, T_C_MIN, TRANSMIT_WINDOW_DELAY, TRANSMIT_WINDOW_MAX, Role)


class ScanMode(str, Enum):
    ACTIVE_WITH_RESPONSE = 'active_with_response'
    PASSIVE_OR_IDLE = 'passive_or_idle'
    CONNECT_REQUEST = 'connect_request'
    CONTINUOUS_SEGMENT = 'continuous_segment'


class SetupKind(str, Enum):
    ESTABLISH = 'establish'
    UPDATE = 'update'


@dataclass(frozen=True)
class ConnectionParams:
    T_c: float
    role: Role = Role.SLAVE
    N_sl_avg: float = 0.0
    sca_master_ppm: float = 50.0
    sca_slave_ppm: float = 50.0
    tx_power: float = 3.0

    def __post_init__(self) -> None:
        object.__setattr__(self, 'role', Role(self.role))
        if not T_C_MIN <= self.T_c <= T_C_MAX:
            raise ParameterRangeError('T_c', self.T_c, (T_C_MIN, T_C_MAX))
        if not 0 <= self.N_sl_avg <= N_SL_MAX:
            raise ParameterRangeError('N_sl_avg', self.N_sl_avg, (0, N_SL_MAX))
        if self.sca_master_ppm < 0 or self.sca_slave_ppm < 0:
            raise ParameterRangeError('sca_ppm', min(self.sca_master_ppm, self.sca_slave_ppm), (0, None))


@dataclass(frozen=True)
class PacketExchange:
    """``pairs`` holds one ``(N_rx, N_tx)`` byte count per packet pair."""
    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'pairs', tuple((int(rx), int(tx)) for rx, tx in self.pairs))
        if len(self.pairs) < 1:
            raise ParameterRangeError('N_seq', 0, (1, None))
        for rx, tx in self.pairs:
            if rx < 0 or tx < 0:
                raise ParameterRangeError('bytes', min(rx, tx), (0, None))

    @classmethod
    def same_payload(cls, pairs: int, rx_bytes: int, tx_bytes: int) -> 'PacketExchange':
        return cls(tuple((rx_bytes, tx_bytes) for _ in range(pairs)))

    @property
    def N_seq(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class Segment:
    name: str
    duration: float = 0.0
    current: float = 0.0
    offset: float = 0.0

    @property
    def charge(self) -> float:
        return self.duration * self.current + self.offset


@dataclass(frozen=True)
class EventCost:
    charge: float
    duration: float
    segments: Tuple[Segment, ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def from_segments(cls, segments: Iterable[Segment]) -> 'EventCost':
        parts = tuple(segments)
        return cls(charge=sum(s.charge for s in parts), duration=sum(s.duration for s in parts), segments=parts)

    def duration_of(self, name: str) -> float:
        return sum(s.duration for s in self.segments if s.name == name)

    def count_of(self, name: str) -> int:
        return sum(1 for s in self.segments if s.name == name)


@dataclass(frozen=True)
class ConnSetupParams:
    T_c_new: float
    d_tw: float = 3e-3
    d_two: float = 0.0
    d_p: Optional[float] = None
    T_c_old: Optional[float] = None
    inclusive_bounds: bool = False

    def __post_init__(self) -> None:
        if self.d_p is None:
            object.__setattr__(self, 'd_p', self.d_tw / 2)
        assert self.d_p is not None
        upper = min(TRANSMIT_WINDOW_MAX, self.T_c_new - TRANSMIT_WINDOW_DELAY)
        if self.inclusive_bounds:
            valid_window = TRANSMIT_WINDOW_DELAY <= self.d_tw <= upper
            valid_offset = 0 <= self.d_p <= self.d_tw
        else:
            valid_window = TRANSMIT_WINDOW_DELAY < self.d_tw < upper
            valid_offset = 0 <= self.d_p < self.d_tw
        if not valid_window:
            raise ParameterRangeError('d_tw', self.d_tw, (TRANSMIT_WINDOW_DELAY, upper))
        if not valid_offset:
            raise ParameterRangeError('d_p', self.d_p, (0, self.d_tw))
        if self.d_two < 0:
            raise ParameterRangeError('d_two', self.d_two, (0, None))
        if self.T_c_old is not None and self.T_c_old < 0:
            raise ParameterRangeError('T_c_old', self.T_c_old, (0, None))

    @classmethod
    def typical(cls, T_c_new: float, T_c_old: Optional[float] = None) -> 'ConnSetupParams':
        """Defaults observed on the BLE112 stack: 3 ms window, first packet in its middle."""
        return cls(T_c_new=T_c_new, d_tw=3e-3, d_two=estimate_d_two_ble112(T_c_new), T_c_old=T_c_old)

    @classmethod
    def worst_case(cls, T_c_new: float, T_c_old: Optional[float] = None) -> 'ConnSetupParams':
        window = min(TRANSMIT_WINDOW_MAX, T_c_new - TRANSMIT_WINDOW_DELAY)
        return cls(T_c_new=T_c_new, d_tw=window, d_two=T_c_new, d_p=window, T_c_old=T_c_old,
                   inclusive_bounds=True)


def window_widening(params: ConnectionParams) -> float:
    if params.role == Role.MASTER:
        return 0.0
    return (params.sca_master_ppm + params.sca_slave_ppm) * params.T_c * params.N_sl_avg / 1e6


def rx_duration(profile: DeviceProfile, N_rx: int, first_rx_of_slave_event: bool = False,
                table: Optional[ConnectedPhaseTable] = None) -> float:
    table = table or profile.connected
    prerx = table.slave_first_prerx if first_rx_of_slave_event else table.d('prerx')
    return N_rx * profile.byte_duration + prerx


def tx_duration(profile: DeviceProfile, N_tx: int, table: Optional[ConnectedPhaseTable] = None) -> float:
    table = table or profile.connected
    return table.d('pretx') + N_tx * profile.byte_duration


def _phase(table: ConnectedPhaseTable, name: str) -> Segment:
    return Segment(name, table.d(name), table.i(name))


def _packet_pairs(profile: DeviceProfile, table: ConnectedPhaseTable, role: Role, exchange: PacketExchange,
                  I_tx: float) -> List[Segment]:
    segments: List[Segment] = []
    for index, (N_rx, N_tx) in enumerate(exchange.pairs):
        rx = Segment('rx', rx_duration(profile, N_rx, role == Role.SLAVE and index == 0, table), table.i('rx'))
        tx = Segment('tx', tx_duration(profile, N_tx, table), I_tx)
        first, second = (rx, tx) if role == Role.SLAVE else (tx, rx)
        segments += [first, _phase(table, 'rxtx'), second, Segment('to', offset=table.q('to'))]
        if index < exchange.N_seq - 1:
            segments.append(_phase(table, 'txrx'))
    return segments


def connection_event_segments(profile: DeviceProfile, params: ConnectionParams,
                              exchange: PacketExchange) -> List[Segment]:
    table = profile.connected_table(params.role)
    I_tx = tx_current(profile, params.tx_power)
    segments = [_phase(table, 'head'), _phase(table, 'pre'), _phase(table, 'cpre')]
    if params.role == Role.SLAVE:
        segments.append(Segment('ww', window_widening(params), table.i('rx')))
    segments += _packet_pairs(profile, table, params.role, exchange, I_tx)
    segments += [_phase(table, 'tra'), _phase(table, 'post'), _phase(table, 'tail')]
    return segments


def connection_event_cost(profile: DeviceProfile, params: ConnectionParams, exchange: PacketExchange) -> EventCost:
    return EventCost.from_segments(connection_event_segments(profile, params, exchange))


def advertising_event_cost(profile: DeviceProfile, channels_used: int = 3, got_response: bool = False,
                           response_bytes: int = CONNECT_REQUEST_BYTES, adv_payload_bytes: int = ADV_PACKET_BYTES,
                           tx_power: float = 3.0) -> EventCost:
    """Advertising event sending on ``channels_used`` channels.

    Each channel occupies a slot of ``d_a``: the packet itself followed by
    listening for a request for the rest of the slot. Slots are separated by
    the channel change ``d_ch``. With ``got_response`` the response is
    received after the last slot, which then also carries the pair offset.
    """
    if channels_used not in (1, 2, 3):
        raise ParameterRangeError('channels_used', channels_used, (1, 3))
    table = profile.connected
    I_tx = tx_current(profile, tx_power)
    d_tx = tx_duration(profile, adv_payload_bytes)
    segments = [_phase(table, 'head'), _phase(table, 'pre'), _phase(table, 'cpre')]
    for channel in range(channels_used):
        if channel:
            segments.append(Segment('chgap', profile.d_ch, table.i('rxtx')))
        segments += [Segment('tx', d_tx, I_tx), Segment('listen', max(profile.d_a - d_tx, 0.0), table.i('rx'))]
    if got_response:
        segments += [Segment('rx', rx_duration(profile, response_bytes), table.i('rx')),
                     Segment('to', offset=table.q('to'))]
    segments += [_phase(table, 'tra'), _phase(table, 'post'), _phase(table, 'tail')]
    return EventCost.from_segments(segments)


def scan_event_cost(profile: DeviceProfile, mode: Union[ScanMode, str], d_s: float, N_tx: int = 0,
                    N_rx: int = 0) -> EventCost:
    mode = ScanMode(mode)
    if d_s <= 0:
        raise ParameterRangeError('d_s', d_s, (0, None))
    scan = profile.scan
    byte = profile.byte_duration

    def phase(name: str) -> Segment:
        return Segment(name, scan.d(name), scan.i(name))

    if mode == ScanMode.CONTINUOUS_SEGMENT:
        return EventCost.from_segments([Segment('rx_s', d_s, scan.i('rx_s')), phase('chch_s')])
    if mode == ScanMode.PASSIVE_OR_IDLE:
        return EventCost.from_segments([phase('pre_s'), Segment('rx_s', d_s, scan.i('rx_s')), phase('post_s')])

    d_tx = scan.d('pretx_s') + N_tx * byte
    tx = Segment('tx_s', d_tx, scan.i('tx_s'))
    if mode == ScanMode.CONNECT_REQUEST:
        return EventCost.from_segments([
            phase('pre_s'), Segment('rx_s', d_s, scan.i('rx_s')), tx, phase('txrx_s'), phase('post_s'),
            Segment('ctx_s', offset=scan.q('ctx_s'))])

    d_rxsr = scan.d('prerx_s') + N_rx * byte
    d_scan = d_s - scan.d('rxtx_s') - d_tx - scan.d('txrx_s') - d_rxsr - scan.d('rxrx_s')
    if d_scan <= 0:
        raise PreconditionError(f'scan window {d_s:g} s too short for the request/response sequence '
                                f'({d_s - d_scan:g} s)')
    return EventCost.from_segments([
        phase('pre_s'), Segment('rx_s', d_scan, scan.i('rx_s')), phase('rxtx_s'), tx, phase('txrx_s'),
        Segment('rxsr', d_rxsr, scan.i('rxsr')), phase('rxrx_s'), phase('post_s'),
        Segment('crx_s', offset=scan.q('crx_s')), Segment('ctx_s', offset=scan.q('ctx_s'))])


def estimate_d_two_ble112(T_c: float) -> float:
    """Transmit window offset chosen by the BLE112 stack for interval ``T_c``."""
    if T_c > 12.5e-3:
        return T_c - 6.454e-3
    if T_c > 7.25e-3:
        return 0.389 * T_c + 0.484e-3
    raise ParameterRangeError('T_c', T_c, (7.25e-3, None), 'no d_two estimate below 7.25 ms')


def _setup_event(profile: DeviceProfile, setup: ConnSetupParams, kind: SetupKind, role: Role,
                 tx_power: float) -> EventCost:
    if kind == SetupKind.ESTABLISH:
        if role == Role.MASTER:
            return advertising_event_cost(profile, channels_used=1, got_response=True,
                                          response_bytes=CONNECT_REQUEST_BYTES,
                                          adv_payload_bytes=ADV_PACKET_BYTES, tx_power=tx_power)
        return scan_event_cost(profile, ScanMode.CONNECT_REQUEST, profile.d_a, N_tx=CONNECT_REQUEST_BYTES)
    T_c = setup.T_c_old if setup.T_c_old and setup.T_c_old >= T_C_MIN else setup.T_c_new
    params = ConnectionParams(T_c=T_c, role=role, tx_power=tx_power)
    pair = (0, CONNECTION_UPDATE_BYTES) if role == Role.MASTER else (CONNECTION_UPDATE_BYTES, 0)
    return connection_event_cost(profile, params, PacketExchange((pair,)))


def connection_setup_cost(profile: DeviceProfile, setup: ConnSetupParams, kind: Union[SetupKind, str],
                          role: Union[Role, str], include_event: bool = False, sca_master_ppm: float = 50.0,
                          sca_slave_ppm: Optional[float] = None, tx_power: float = 3.0) -> EventCost:
    """Charge from the last event on the old schedule to the first event on the new one.

    The embedded advertising, scan or connection event is attributed to the
    discovery model and left out unless ``include_event`` is set.
    """
    kind, role = SetupKind(kind), Role(role)
    sca_slave_ppm = profile.sca_ppm if sca_slave_ppm is None else sca_slave_ppm
    assert setup.d_p is not None
    if kind == SetupKind.UPDATE and setup.T_c_old is None:
        raise PreconditionError('connection update needs T_c_old')

    event = _setup_event(profile, setup, kind, role, tx_power) if include_event else EventCost(0.0, 0.0)
    I_sl, I_rx = profile.I_sl, profile.connected_table(role).i('rx')
    sca = (sca_master_ppm + sca_slave_ppm) / 1e6
    if kind == SetupKind.ESTABLISH:
        wait = TRANSMIT_WINDOW_DELAY + setup.d_two
        sleep_deducted = 0.0
    else:
        assert setup.T_c_old is not None
        wait = setup.T_c_old + setup.d_two
        sleep_deducted = event.duration

    segments = list(event.segments)
    if role == Role.MASTER:
        segments.append(Segment('sleep', wait + setup.d_p - sleep_deducted, I_sl))
    else:
        d_ww = sca * wait
        segments += [Segment('sleep', wait - d_ww - sleep_deducted, I_sl),
                     Segment('ww', setup.d_p + d_ww, I_rx)]
    log.debug(f'{kind.value} {role.value}: wait {wait:g} s, d_p {setup.d_p:g} s, event {event.charge:g} C')
    return EventCost(charge=event.charge + sum(s.charge for s in segments[len(event.segments):]),
                     duration=wait + setup.d_p, segments=tuple(segments))
