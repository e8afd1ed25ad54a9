from typing import Optional, Sequence, Tuple


class ModelError(ValueError):
    """Base class of every error raised by the energy model."""


class ProfileParseError(ModelError):
    pass


class ProfileValidationError(ModelError):
    def __init__(self, field: str, invariant: str) -> None:
        super().__init__(f'{field}: violates {invariant}')
        self.field = field
        self.invariant = invariant


class UnknownTxPowerError(ModelError):
    def __init__(self, tx_power: float, available: Sequence[float]) -> None:
        levels = ', '.join(f'{level:g}' for level in available)
        super().__init__(f'unknown tx-power level {tx_power:g} dBm (available: {levels})')
        self.tx_power = tx_power
        self.available = tuple(available)


class ParameterRangeError(ModelError):
    def __init__(self, name: str, value: float, bounds: Optional[Tuple[Optional[float], Optional[float]]] = None,
                 detail: str = '') -> None:
        message = f'{name}={value:g} out of range'
        if bounds is not None:
            lo, hi = bounds
            message += f' [{"-inf" if lo is None else f"{lo:g}"}, {"inf" if hi is None else f"{hi:g}"}]'
        if detail:
            message += f' ({detail})'
        super().__init__(message)
        self.name = name
        self.value = value
        self.bounds = bounds


class PreconditionError(ModelError):
    pass


class InfeasibleScheduleError(ModelError):
    pass


class MissingVariationError(ModelError):
    pass
