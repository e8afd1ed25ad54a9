"""Measured per-phase model parameters of one device and their file format.

A profile file is JSON. Durations, currents and charges are stored in the
units named by the top-level ``units`` map (``ms``, ``mA`` and ``uC`` for the
bundled profiles); everything is converted to seconds, amperes and coulombs on
load and converted back by :func:`dump_profile`.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, TypeVar, Union

from .errors import ProfileParseError, ProfileValidationError, UnknownTxPowerError
from .logger import log
from .model_base.constants import BITS_PER_BYTE, Role
from .utils.helper import UNIT_SCALE, from_si, to_si

PROFILES_DIR = Path(__file__).parent / 'profiles'
DEFAULT_PROFILE = 'ble112'

# d: duration, i: current, q: charge offset
CONNECTED_SCHEMA: Dict[str, str] = {
    'head': 'di', 'pre': 'di', 'rx': 'i', 'rxtx': 'di', 'tx': 'i', 'pretx': 'd', 'txrx': 'di',
    'cpre': 'di', 'prerx': 'd', 'tra': 'di', 'post': 'di', 'tail': 'di', 'to': 'q',
}
SCAN_SCHEMA: Dict[str, str] = {
    'pre_s': 'di', 'rx_s': 'i', 'rxtx_s': 'di', 'tx_s': 'i', 'pretx_s': 'd', 'txrx_s': 'di',
    'rxsr': 'i', 'prerx_s': 'd', 'rxrx_s': 'di', 'post_s': 'di', 'chch_s': 'di',
    'ctx_s': 'q', 'crx_s': 'q',
}
_KIND_FIELD = {'d': 'duration', 'i': 'current', 'q': 'charge'}

_Table = TypeVar('_Table', bound='PhaseTable')


@dataclass(frozen=True)
class PhaseStats:
    avg: float
    min: float
    max: float
    std: float

    @property
    def spread(self) -> float:
        return self.max - self.min


@dataclass(frozen=True)
class Phase:
    duration: Optional[PhaseStats] = None
    current: Optional[PhaseStats] = None
    charge: Optional[PhaseStats] = None

    def stats(self, kind: str) -> Optional[PhaseStats]:
        return getattr(self, _KIND_FIELD.get(kind, kind))


@dataclass(frozen=True)
class PhaseTable:
    phases: Mapping[str, Phase]

    def __getitem__(self, name: str) -> Phase:
        return self.phases[name]

    def d(self, name: str) -> float:
        stats = self.phases[name].duration
        assert stats is not None, name
        return stats.avg

    def i(self, name: str) -> float:
        stats = self.phases[name].current
        assert stats is not None, name
        return stats.avg

    def q(self, name: str) -> float:
        stats = self.phases[name].charge
        assert stats is not None, name
        return stats.avg

    def charge(self, name: str) -> float:
        return self.d(name) * self.i(name)

    def with_stats(self: _Table, name: str, kind: str, stats: PhaseStats) -> _Table:
        phases = dict(self.phases)
        phases[name] = dataclasses.replace(phases[name], **{_KIND_FIELD[kind]: stats})
        return dataclasses.replace(self, phases=phases)


@dataclass(frozen=True)
class ConnectedPhaseTable(PhaseTable):
    slave_first_prerx: float = 388e-6


@dataclass(frozen=True)
class ScanPhaseTable(PhaseTable):
    pass


@dataclass(frozen=True)
class TxPowerTable:
    levels: Tuple[Tuple[float, float], ...]

    def current(self, tx_power: float) -> float:
        for dbm, current in self.levels:
            if dbm == tx_power:
                return current
        raise UnknownTxPowerError(tx_power, [dbm for dbm, _ in self.levels])

    def with_current(self, tx_power: float, current: float) -> 'TxPowerTable':
        self.current(tx_power)
        return TxPowerTable(tuple((dbm, current if dbm == tx_power else i) for dbm, i in self.levels))


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    connected: ConnectedPhaseTable
    scan: ScanPhaseTable
    tx_power: TxPowerTable
    I_sl: float
    sca_ppm: float
    d_ifs: float  # folded into the measured rxtx/txrx phases; carried for round-tripping
    bit_duration: float
    d_a: float = 446e-6
    d_ch: float = 150e-6
    master_connected: Optional[ConnectedPhaseTable] = field(default=None, compare=False)
    units: Mapping[str, str] = field(default_factory=lambda: {'d': 'ms', 'i': 'mA', 'q': 'uC'}, compare=False)

    def connected_table(self, role: Union[Role, str]) -> ConnectedPhaseTable:
        if Role(role) == Role.MASTER and self.master_connected is not None:
            return self.master_connected
        return self.connected

    @property
    def byte_duration(self) -> float:
        return BITS_PER_BYTE * self.bit_duration


def tx_current(profile: DeviceProfile, tx_power: float) -> float:
    """Current of the tx phase at ``tx_power`` dBm, exact table lookup."""
    return profile.tx_power.current(tx_power)


def _number(value: Any, field_name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProfileValidationError(field_name, 'numeric value')
    return float(value)


def _parse_stats(entry: Any, unit: str, field_name: str) -> PhaseStats:
    if not isinstance(entry, dict):
        raise ProfileValidationError(field_name, 'object with avg/min/max/std')
    missing = {'avg', 'min', 'max', 'std'} - set(entry)
    if missing:
        raise ProfileValidationError(field_name, f'required keys {sorted(missing)}')
    values = {key: to_si(_number(entry[key], f'{field_name}.{key}'), unit) for key in ('avg', 'min', 'max', 'std')}
    stats = PhaseStats(**values)
    if not stats.min <= stats.avg <= stats.max:
        raise ProfileValidationError(field_name, 'min <= avg <= max')
    if stats.std < 0:
        raise ProfileValidationError(field_name, 'std >= 0')
    return stats


def _parse_table(data: Any, schema: Mapping[str, str], units: Mapping[str, str], section: str,
                 base: Optional[Mapping[str, Phase]] = None) -> Dict[str, Phase]:
    if not isinstance(data, dict):
        raise ProfileValidationError(section, 'object of phases')
    unknown = set(data) - set(schema)
    if unknown:
        raise ProfileValidationError(section, f'known phase names (unexpected {sorted(unknown)})')
    phases: Dict[str, Phase] = dict(base or {})
    for name, kinds in schema.items():
        if name not in data:
            if name in phases:
                continue
            raise ProfileValidationError(f'{section}.{name}', 'every phase present exactly once')
        entry = data[name]
        if not isinstance(entry, dict) or set(entry) != set(kinds):
            raise ProfileValidationError(f'{section}.{name}', f'exactly the statistics {list(kinds)}')
        phases[name] = Phase(**{_KIND_FIELD[kind]: _parse_stats(entry[kind], units[kind], f'{section}.{name}.{kind}')
                                for kind in kinds})
    return phases


def _parse_tx_power(data: Any) -> TxPowerTable:
    if not isinstance(data, list) or not data:
        raise ProfileValidationError('tx_power_table', 'non-empty list')
    levels = []
    for index, entry in enumerate(data):
        if not isinstance(entry, dict) or set(entry) != {'dBm', 'mA'}:
            raise ProfileValidationError(f'tx_power_table[{index}]', 'object with dBm and mA')
        dbm = _number(entry['dBm'], f'tx_power_table[{index}].dBm')
        current = to_si(_number(entry['mA'], f'tx_power_table[{index}].mA'), 'mA')
        if current <= 0:
            raise ProfileValidationError(f'tx_power_table[{index}].mA', 'I_tx > 0')
        levels.append((dbm, current))
    if len({dbm for dbm, _ in levels}) != len(levels):
        raise ProfileValidationError('tx_power_table', 'unique power levels')
    by_power = sorted(levels)
    for (_, low), (dbm, high) in zip(by_power, by_power[1:]):
        if high < low:
            raise ProfileValidationError(f'tx_power_table[{dbm:g} dBm]', 'I_tx non-decreasing with tx-power')
    return TxPowerTable(tuple(levels))


def _positive(data: Mapping[str, Any], key: str, unit: str, allow_zero: bool = False, default: Any = None) -> float:
    if key not in data:
        if default is None:
            raise ProfileValidationError(key, 'required key')
        value = float(default)
    else:
        value = _number(data[key], key)
    if value < 0 or (value == 0 and not allow_zero):
        raise ProfileValidationError(key, f'{key} {">=" if allow_zero else ">"} 0')
    return to_si(value, unit)


def parse_profile(data: Any) -> DeviceProfile:
    if not isinstance(data, dict):
        raise ProfileValidationError('<root>', 'JSON object')
    units = {'d': 'ms', 'i': 'mA', 'q': 'uC'}
    units.update(data.get('units', {}))
    for kind, unit in units.items():
        if kind not in _KIND_FIELD or unit not in UNIT_SCALE:
            raise ProfileValidationError(f'units.{kind}', f'known unit (got {unit!r})')

    name = data.get('name')
    if not isinstance(name, str) or not name:
        raise ProfileValidationError('name', 'non-empty text')

    slave_first_prerx = _positive(data, 'slave_first_prerx_us', 'us')
    connected_phases = _parse_table(data.get('connected_phases'), CONNECTED_SCHEMA, units, 'connected_phases')
    connected = ConnectedPhaseTable(connected_phases, slave_first_prerx=slave_first_prerx)

    master_connected = None
    master_overrides = data.get('role_overrides', {}).get('master', {}).get('connected_phases')
    if master_overrides is not None:
        phases = _parse_table(master_overrides, CONNECTED_SCHEMA, units, 'role_overrides.master.connected_phases',
                              base=connected_phases)
        master_connected = ConnectedPhaseTable(phases, slave_first_prerx=slave_first_prerx)

    profile = DeviceProfile(
        name=name,
        connected=connected,
        scan=ScanPhaseTable(_parse_table(data.get('scan_phases'), SCAN_SCHEMA, units, 'scan_phases')),
        tx_power=_parse_tx_power(data.get('tx_power_table')),
        I_sl=_positive(data, 'sleep_current_uA', 'uA'),
        sca_ppm=_positive(data, 'sca_ppm', 's', allow_zero=True),
        d_ifs=_positive(data, 'ifs_us', 'us'),
        bit_duration=_positive(data, 'bit_us', 'us'),
        d_a=_positive(data, 'adv_packet_us', 'us', default=446),
        d_ch=_positive(data, 'channel_change_us', 'us', allow_zero=True, default=150),
        master_connected=master_connected,
        units=units,
    )
    log.debug(f'profile {profile.name}: {len(connected_phases)} connected phases, '
              f'{len(profile.tx_power.levels)} tx-power levels')
    return profile


def load_profile(path: Union[str, Path]) -> DeviceProfile:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ProfileParseError(f'cannot read profile {path}: {e.strerror}') from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProfileParseError(f'{path}:{e.lineno}:{e.colno}: {e.msg}') from e
    log.debug(f'loading profile from {path}')
    return parse_profile(data)


def bundled_profile_path(name: str = DEFAULT_PROFILE) -> Path:
    return PROFILES_DIR / f'{name}.profile'


def load_bundled_profile(name: str = DEFAULT_PROFILE) -> DeviceProfile:
    return load_profile(bundled_profile_path(name))


def _dump_stats(stats: PhaseStats, unit: str) -> Dict[str, float]:
    return {key: from_si(getattr(stats, key), unit) for key in ('avg', 'min', 'max', 'std')}


def _dump_table(table: PhaseTable, schema: Mapping[str, str], units: Mapping[str, str]) -> Dict[str, Any]:
    result: Dict[str, Any] = {}
    for name, kinds in schema.items():
        phase = table[name]
        entry = {}
        for kind in kinds:
            stats = phase.stats(kind)
            assert stats is not None
            entry[kind] = _dump_stats(stats, units[kind])
        result[name] = entry
    return result


def dump_profile(profile: DeviceProfile) -> Dict[str, Any]:
    """Serialise a profile to the file schema, inverse of :func:`parse_profile`."""
    units = dict(profile.units)
    data: Dict[str, Any] = {
        'name': profile.name,
        'units': units,
        'sleep_current_uA': from_si(profile.I_sl, 'uA'),
        'sca_ppm': profile.sca_ppm,
        'ifs_us': from_si(profile.d_ifs, 'us'),
        'bit_us': from_si(profile.bit_duration, 'us'),
        'slave_first_prerx_us': from_si(profile.connected.slave_first_prerx, 'us'),
        'adv_packet_us': from_si(profile.d_a, 'us'),
        'channel_change_us': from_si(profile.d_ch, 'us'),
        'connected_phases': _dump_table(profile.connected, CONNECTED_SCHEMA, units),
        'scan_phases': _dump_table(profile.scan, SCAN_SCHEMA, units),
        'tx_power_table': [{'dBm': dbm, 'mA': from_si(current, 'mA')} for dbm, current in profile.tx_power.levels],
    }
    if profile.master_connected is not None:
        data['role_overrides'] = {
            'master': {'connected_phases': _dump_table(profile.master_connected, CONNECTED_SCHEMA, units)}}
    return data
