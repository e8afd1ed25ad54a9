import math
import re
from typing import Dict, List, Tuple

_valid_parameter_name_re = re.compile(r'^[A-Za-z][A-Za-z_0-9]*$')

UNIT_SCALE: Dict[str, float] = {
    's': 1.0, 'ms': 1e3, 'us': 1e6,
    'A': 1.0, 'mA': 1e3, 'uA': 1e6,
    'C': 1.0, 'uC': 1e6, 'nC': 1e9,
}


def to_si(value: float, unit: str) -> float:
    return float(value) / UNIT_SCALE[unit]


def from_si(value: float, unit: str) -> float:
    """Convert back to file units, rounded to 15 significant digits so that
    decimal values read through :func:`to_si` come back unchanged."""
    return float(f'{value * UNIT_SCALE[unit]:.15g}')


def grid(start: float, stop: float, step: float) -> List[float]:
    """Inclusive arithmetic grid; values are rounded to 12 decimals so that
    sweeps print as typed (0.3 rather than 0.30000000000000004)."""
    if step <= 0:
        raise ValueError(f'step must be positive, got {step}')
    if not start < stop:
        raise ValueError(f'start ({start}) must be below stop ({stop})')
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def parse_grid(text: str) -> List[float]:
    """Parse ``value`` or ``start:stop:step``."""
    parts = text.split(':')
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f'expected VALUE or START:STOP:STEP, got {text!r}')
    start, stop, step = map(float, parts)
    return grid(start, stop, step)


def parse_assignment(text: str) -> Tuple[str, float]:
    name, sep, value = text.partition('=')
    if not sep or not _valid_parameter_name_re.match(name):
        raise ValueError(f'expected NAME=VALUE, got {text!r}')
    return name, float(value)
