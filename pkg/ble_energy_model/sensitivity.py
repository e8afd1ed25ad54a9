"""How much the charge of one connection interval moves with the spread of a phase.

Phases are varied one at a time between the min and max values recorded in
the profile; all other phases stay at their averages.
"""

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple, Union

from .device_profile import CONNECTED_SCHEMA, ConnectedPhaseTable, DeviceProfile, PhaseStats, tx_current
from .errors import MissingVariationError
from .event_model import ConnectionParams, EventCost, PacketExchange, connection_event_cost
from .logger import log
from .model_base.constants import Role

_KIND_KEY = {'duration': 'd', 'current': 'i'}
# phases whose current is applied to segments of another name
_CURRENT_SEGMENTS = {'rx': ('rx', 'ww'), 'tx': ('tx',)}


class SensitivityKind(str, Enum):
    DURATION = 'duration'
    CURRENT = 'current'


@dataclass(frozen=True)
class SensitivityReport:
    phase: str
    kind: SensitivityKind
    S: float
    delta_Q: float
    Q_total: float
    occurrences: int = 1

    @property
    def relative_change(self) -> float:
        return self.delta_Q / self.Q_total

    @classmethod
    def from_spread(cls, phase: str, kind: Union[SensitivityKind, str], S: float, spread: float, Q_total: float,
                    occurrences: int = 1) -> 'SensitivityReport':
        return cls(phase, SensitivityKind(kind), S, occurrences * spread * S, Q_total, occurrences)


def interval_charge(profile: DeviceProfile, params: ConnectionParams, exchange: PacketExchange) -> float:
    """Charge of one connection interval: the event plus sleep until the next one."""
    event = connection_event_cost(profile, params, exchange)
    return event.charge + (params.T_c - event.duration) * profile.I_sl


def _variation(table: ConnectedPhaseTable, phase: str, kind: SensitivityKind) -> PhaseStats:
    if phase not in CONNECTED_SCHEMA:
        raise MissingVariationError(f'unknown phase {phase!r}')
    stats = table[phase].stats(_KIND_KEY[kind.value])
    if stats is None:
        raise MissingVariationError(f'phase {phase!r} has no {kind.value} variation data')
    return stats


def _duration_occurrences(event: EventCost, table: ConnectedPhaseTable, params: ConnectionParams,
                          phase: str, I_tx: float) -> Tuple[int, float]:
    """How often ``phase`` lasts inside the event and at which current."""
    if phase == 'pretx':
        return event.count_of('tx'), I_tx
    if phase == 'prerx':
        first_of_slave = 1 if params.role == Role.SLAVE else 0
        return max(event.count_of('rx') - first_of_slave, 0), table.i('rx')
    return event.count_of(phase), table.i(phase)


def duration_sensitivity(profile: DeviceProfile, phase: str, params: ConnectionParams,
                         exchange: PacketExchange) -> SensitivityReport:
    table = profile.connected_table(params.role)
    stats = _variation(table, phase, SensitivityKind.DURATION)
    event = connection_event_cost(profile, params, exchange)
    occurrences, current = _duration_occurrences(event, table, params, phase, tx_current(profile, params.tx_power))
    return SensitivityReport.from_spread(phase, SensitivityKind.DURATION, current - profile.I_sl, stats.spread,
                                         interval_charge(profile, params, exchange), occurrences)


def current_sensitivity(profile: DeviceProfile, phase: str, params: ConnectionParams,
                        exchange: PacketExchange) -> SensitivityReport:
    table = profile.connected_table(params.role)
    stats = _variation(table, phase, SensitivityKind.CURRENT)
    event = connection_event_cost(profile, params, exchange)
    names = _CURRENT_SEGMENTS.get(phase, (phase,))
    S = sum(event.duration_of(name) for name in names)
    return SensitivityReport.from_spread(phase, SensitivityKind.CURRENT, S, stats.spread,
                                         interval_charge(profile, params, exchange))


def sensitivity_table(profile: DeviceProfile, params: ConnectionParams, exchange: PacketExchange,
                      kinds: Tuple[SensitivityKind, ...] = (SensitivityKind.DURATION, SensitivityKind.CURRENT),
                      ) -> List[SensitivityReport]:
    """Reports for every phase that occurs in the event and has variation data."""
    reports = []
    for kind in kinds:
        measure = duration_sensitivity if kind == SensitivityKind.DURATION else current_sensitivity
        for phase in CONNECTED_SCHEMA:
            try:
                report = measure(profile, phase, params, exchange)
            except MissingVariationError:
                continue
            if report.S == 0 or report.occurrences == 0:
                log.debug(f'{phase} does not occur in the event, no {kind.value} sensitivity')
                continue
            reports.append(report)
    return reports


def _with_value(profile: DeviceProfile, role: Role, phase: str, kind: SensitivityKind, stats: PhaseStats,
                value: float, tx_power: float) -> DeviceProfile:
    if kind == SensitivityKind.CURRENT and phase == 'tx':
        return dataclasses.replace(profile, tx_power=profile.tx_power.with_current(tx_power, value))
    table = profile.connected_table(role)
    varied = table.with_stats(phase, _KIND_KEY[kind.value], dataclasses.replace(stats, avg=value))
    if role == Role.MASTER and profile.master_connected is not None:
        return dataclasses.replace(profile, master_connected=varied)
    return dataclasses.replace(profile, connected=varied)


def brute_force_delta(profile: DeviceProfile, phase: str, kind: Union[SensitivityKind, str],
                      params: ConnectionParams, exchange: PacketExchange) -> float:
    """Interval charge at the max value of a phase minus the charge at its min value."""
    kind = SensitivityKind(kind)
    stats = _variation(profile.connected_table(params.role), phase, kind)
    low, high = (interval_charge(_with_value(profile, params.role, phase, kind, stats, value, params.tx_power),
                                 params, exchange)
                 for value in (stats.min, stats.max))
    return high - low
