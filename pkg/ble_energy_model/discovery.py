"""Expected neighbor-discovery latency of an advertiser/scanner pair.

The general estimate integrates over the phase offset ``phi`` between the
advertiser's first event and the scanner's first scan event on channel 37,
accumulating hit probabilities event by event. The offsets are evaluated
together as numpy vectors; the final mean is an ordered ``math.fsum``.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union, overload

import numpy as np
from scipy.special import erfc

from .device_profile import DeviceProfile
from .errors import ParameterRangeError, PreconditionError
from .logger import log
from .model_base.constants import ADV_CHANNELS, RHO_MAX, T_A_MAX, T_A_MIN, T_S_MAX

_SQRT2 = math.sqrt(2.0)
_CONTINUOUS_TOLERANCE = 1e-9


class DiscoveryMethod(str, Enum):
    ALGORITHM = 'algorithm1'
    CONTINUOUS = 'continuous_closed_form'
    BOUNDED = 'bounded_closed_form'


@dataclass(frozen=True)
class AdvScanParams:
    T_a0: float
    T_s: float
    d_s: float
    d_a: float = 446e-6
    d_ch: float = 150e-6
    rho_max: float = RHO_MAX

    def __post_init__(self) -> None:
        if not T_A_MIN <= self.T_a0 < T_A_MAX:
            raise ParameterRangeError('T_a0', self.T_a0, (T_A_MIN, T_A_MAX))
        if not 0 < self.T_s < T_S_MAX:
            raise ParameterRangeError('T_s', self.T_s, (0, T_S_MAX))
        if not 0 < self.d_s <= self.T_s:
            raise ParameterRangeError('d_s', self.d_s, (0, self.T_s))
        for name in ('d_a', 'd_ch', 'rho_max'):
            if getattr(self, name) < 0:
                raise ParameterRangeError(name, getattr(self, name), (0, None))

    @classmethod
    def from_profile(cls, profile: DeviceProfile, T_a0: float, T_s: float, d_s: float,
                     rho_max: float = RHO_MAX) -> 'AdvScanParams':
        return cls(T_a0=T_a0, T_s=T_s, d_s=d_s, d_a=profile.d_a, d_ch=profile.d_ch, rho_max=rho_max)

    @property
    def T_a_eff(self) -> float:
        """Mean advertising interval including the expected random delay."""
        return self.T_a0 + self.rho_max / 2

    @property
    def d_s_eff(self) -> float:
        return self.d_s - self.d_a

    @property
    def continuous(self) -> bool:
        return abs(self.d_s - self.T_s) <= _CONTINUOUS_TOLERANCE * self.T_s

    @property
    def bounded(self) -> bool:
        return not self.continuous and self.T_a0 <= self.d_s_eff


@dataclass(frozen=True)
class AlgoConfig:
    epsilon: float = 0.9999
    delta: Optional[float] = None
    d_exp_max: float = 1000.0
    max_events: int = 1_000_000

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ParameterRangeError('epsilon', self.epsilon, (0, 1))
        if self.delta is not None and self.delta <= 0:
            raise ParameterRangeError('delta', self.delta, (0, None))
        if self.d_exp_max <= 0:
            raise ParameterRangeError('d_exp_max', self.d_exp_max, (0, None))
        if self.max_events < 1:
            raise ParameterRangeError('max_events', self.max_events, (1, None))

    def resolve_delta(self, T_s: float) -> float:
        delta = T_s / 33.3 if self.delta is None else self.delta
        if not 0 < delta < 3 * T_s:
            raise ParameterRangeError('delta', delta, (0, 3 * T_s))
        return delta


@dataclass(frozen=True)
class ChannelWindow:
    channel: int
    d_early: float
    d_late: float
    d_s_eff: float


@dataclass(frozen=True)
class DiscoveryEstimate:
    d_adv_mean: float
    method: DiscoveryMethod
    aborted: bool = False
    adv_charge_mean: Optional[float] = None
    d_adv_max: Optional[float] = None
    offsets: int = 0
    aborted_offsets: int = 0
    max_events: int = 0


def channel_window(ch: int, params: AdvScanParams) -> ChannelWindow:
    if ch not in ADV_CHANNELS:
        raise ParameterRangeError('channel', ch, (37, 39))
    index = ch - 37
    d_early = index * (params.d_a + params.d_ch)
    d_late = d_early + params.d_a
    return ChannelWindow(ch, d_early, d_late, params.d_s + d_early - d_late)


def adv_event_duration(ch: int, params: AdvScanParams) -> float:
    """Duration of an advertising event that ends with a reception on ``ch``."""
    return channel_window(ch, params).d_late


def normal_cdf(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    return 0.5 * erfc(-np.asarray(x, dtype=float) / _SQRT2)


@overload
def rho_sum_cdf(n: int, t: float, rho_max: float = ...) -> float: ...


@overload
def rho_sum_cdf(n: int, t: np.ndarray, rho_max: float = ...) -> np.ndarray: ...


def rho_sum_cdf(n, t, rho_max=RHO_MAX):
    """CDF of the sum of ``n`` random advertising delays, each uniform on [0, rho_max].

    ``n = 0`` is the empty sum (a unit step at 0); 1 and 2 are exact, larger
    ``n`` use the normal approximation.
    """
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if n < 0:
        raise ParameterRangeError('n', n, (0, None))
    if n == 0 or rho_max == 0:
        result = (t >= 0).astype(float)
    elif n == 1:
        result = np.clip(t / rho_max, 0.0, 1.0)
    elif n == 2:
        u = np.clip(t / rho_max, 0.0, 2.0)
        result = np.where(u <= 1.0, u * u / 2, 1.0 - (2.0 - u) ** 2 / 2)
    else:
        result = normal_cdf((t - n * rho_max / 2) / (math.sqrt(n / 12) * rho_max))
    return float(result) if scalar else result


def hit_probability(k: int, n: int, t_ai: float, window: ChannelWindow, T_s: float, d_s: float,
                    rho_max: float = RHO_MAX) -> float:
    """Probability that advertising event ``n``, nominally at ``t_ai``, starts inside
    the success interval of scan event ``k``."""
    upper = k * T_s + d_s - window.d_late - t_ai
    lower = k * T_s - window.d_early - t_ai
    return min(max(rho_sum_cdf(n, upper, rho_max) - rho_sum_cdf(n, lower, rho_max), 0.0), 1.0)


@dataclass(frozen=True)
class _Accumulation:
    d_exp: np.ndarray
    q_exp: np.ndarray
    aborted: np.ndarray
    events: int


def _accumulate(params: AdvScanParams, cfg: AlgoConfig,
                event_charge: Optional[Tuple[float, Sequence[float]]] = None) -> _Accumulation:
    T_a, T_s, d_s, rho = params.T_a0, params.T_s, params.d_s, params.rho_max
    T_a_eff = params.T_a_eff
    delta = cfg.resolve_delta(T_s)
    count = int(math.floor(3 * T_s / delta + 1e-9))
    phis = np.arange(count) * delta

    windows = [channel_window(ch, params) for ch in ADV_CHANNELS]
    early = np.array([w.d_early for w in windows])
    late = np.array([w.d_late for w in windows])
    full_charge, last_charge = event_charge if event_charge is not None else (0.0, (0.0, 0.0, 0.0))
    last = np.asarray(last_charge, dtype=float)

    d_exp = np.zeros(count)
    q_exp = np.zeros(count)
    p_cm = np.ones(count)
    aborted = np.zeros(count, dtype=bool)
    active = np.ones(count, dtype=bool)

    n = 0
    while active.any():
        idx = np.flatnonzero(active)
        t_ai = phis[idx] + n * T_a
        k_min = np.floor(t_ai / T_s).astype(np.int64)
        k_max = np.floor((t_ai + n * rho / 2) / T_s).astype(np.int64)
        p_hit = np.zeros(idx.size)
        for j in range(int((k_max - k_min).max()) + 1):
            k = k_min + j
            valid = k <= k_max
            ch = np.mod(k, 3)
            upper = k * T_s + d_s - late[ch] - t_ai
            lower = k * T_s - early[ch] - t_ai
            p_k = np.clip(rho_sum_cdf(n, upper, rho) - rho_sum_cdf(n, lower, rho), 0.0, 1.0) * valid
            p_hit += p_k
            weight = p_k * p_cm[idx]
            d_exp[idx] += weight * (n * T_a_eff + late[ch])
            q_exp[idx] += weight * (n * full_charge + last[ch])
        p_cm[idx] *= 1.0 - np.minimum(p_hit, 1.0)
        n += 1

        converged = 1.0 - p_cm[idx] > cfg.epsilon
        remaining = d_exp[idx] + p_cm[idx] * n * T_a_eff
        overflow = ~converged & ((remaining > cfg.d_exp_max) | (n >= cfg.max_events))
        aborted[idx[overflow]] = True
        active[idx[converged | overflow]] = False

    return _Accumulation(d_exp, q_exp, aborted, n)


def _estimate(params: AdvScanParams, cfg: AlgoConfig,
              event_charge: Optional[Tuple[float, Sequence[float]]]) -> DiscoveryEstimate:
    acc = _accumulate(params, cfg, event_charge)
    count = acc.d_exp.size
    per_offset = np.where(acc.aborted, np.maximum(acc.d_exp, cfg.d_exp_max), acc.d_exp)
    aborted_offsets = int(acc.aborted.sum())
    if aborted_offsets:
        log.warning(f'coupling: {aborted_offsets}/{count} offsets exceeded {cfg.d_exp_max:g} s '
                    f'(T_a0={params.T_a0:g}, T_s={params.T_s:g}, d_s={params.d_s:g})')
    log.debug(f'algorithm: {count} offsets, {acc.events} events at most')
    return DiscoveryEstimate(
        d_adv_mean=math.fsum(per_offset.tolist()) / count,
        method=DiscoveryMethod.ALGORITHM,
        aborted=aborted_offsets > 0,
        adv_charge_mean=math.fsum(acc.q_exp.tolist()) / count if event_charge is not None else None,
        offsets=count,
        aborted_offsets=aborted_offsets,
        max_events=acc.events,
    )


def expected_discovery_latency(params: AdvScanParams, cfg: AlgoConfig = AlgoConfig()) -> DiscoveryEstimate:
    return _estimate(params, cfg, None)


def expected_discovery_charge(params: AdvScanParams, cfg: AlgoConfig, full_event_charge: float,
                              last_event_charge: Sequence[float]) -> DiscoveryEstimate:
    """Latency estimate that also accumulates the advertiser's expected charge.

    ``full_event_charge`` is charged once per advertising event that was not
    received (event plus the sleep until the next one), ``last_event_charge``
    holds the charge of the final event for channels 37, 38 and 39.
    """
    if len(last_event_charge) != 3:
        raise ParameterRangeError('last_event_charge', len(last_event_charge), (3, 3))
    return _estimate(params, cfg, (full_event_charge, last_event_charge))


def max_latency_continuous(params: AdvScanParams) -> float:
    return params.T_a0 + 3 * params.d_a + 2 * params.d_ch


def expected_discovery_latency_continuous(params: AdvScanParams) -> DiscoveryEstimate:
    if not params.continuous:
        raise PreconditionError(f'continuous scanning needs d_s == T_s (d_s={params.d_s:g}, T_s={params.T_s:g})')
    d_a, d_ch, d_s, T_a = params.d_a, params.d_ch, params.d_s, params.T_a_eff
    d_adv = (2 * d_ch * T_a / (3 * d_s) + d_a * T_a / d_s - d_ch ** 2 / d_s - 2 * d_a * d_ch / d_s
             - d_a ** 2 / d_s + d_ch + 2 * d_a)
    return DiscoveryEstimate(d_adv_mean=d_adv, method=DiscoveryMethod.CONTINUOUS,
                             d_adv_max=max_latency_continuous(params))


def max_latency_bounded(params: AdvScanParams) -> float:
    return math.ceil((params.T_s - params.d_s) / params.T_a0 - 1e-12) * params.T_a0 + 3 * params.d_a + 2 * params.d_ch


def max_latency_bounded_with_delay(params: AdvScanParams) -> float:
    """Bound of the bounded case that also holds with random advertising delays.

    :func:`max_latency_bounded` assumes events exactly ``T_a0`` apart; every
    delay can stretch an interval by up to ``rho_max`` and the gap in front of
    a channel 37 window is longer by ``3 d_a + 2 d_ch``.
    """
    tail = 3 * params.d_a + 2 * params.d_ch
    events = math.ceil((params.T_s - params.d_s + tail) / params.T_a0)
    return events * (params.T_a0 + params.rho_max) + tail


def _check_bounded(params: AdvScanParams) -> None:
    if params.continuous or params.d_s >= params.T_s:
        raise PreconditionError('bounded latency form needs d_s < T_s')
    if params.T_a0 > params.d_s_eff:
        raise PreconditionError(f'bounded latency form needs T_a0 <= d_s - d_a '
                                f'({params.T_a0:g} > {params.d_s_eff:g}); use the algorithm')


def expected_discovery_latency_bounded(params: AdvScanParams) -> DiscoveryEstimate:
    _check_bounded(params)
    d_a, d_ch, d_s, T_s, T_a = params.d_a, params.d_ch, params.d_s, params.T_s, params.T_a0

    def A(n: int) -> float:
        return n * d_a + (n - 1) * d_ch

    def B(n: int) -> float:
        return A(n) + d_ch

    def C(n: int) -> int:
        return math.floor(((A(n) + T_s) - (B(n) + d_s)) / T_a)

    def h1(n: int) -> float:
        return ((A(n) + T_s) - (B(n) + d_s)) / T_a - C(n)

    def h2(n: int) -> float:
        return (d_s - T_a) + (B(n) - A(n))

    h3 = T_a * (d_a + d_ch) * (h1(2) + 2 * h1(3)) / (3 * T_s)
    channels = (1, 2, 3)
    d_adv = ((d_a + (T_s - T_a) / 2) - (d_a + d_ch) * (d_a - d_s) / T_s
             - sum(h2(n) * (1 - (T_a + h2(n)) / (2 * T_s)) for n in channels) / 3
             + T_a ** 2 / (2 * T_s) * sum(h1(n) * (1 - h1(n)) for n in channels) / 3
             + h3)
    return DiscoveryEstimate(d_adv_mean=d_adv, method=DiscoveryMethod.BOUNDED, d_adv_max=max_latency_bounded(params))


def bounded_latency_piecewise(params: AdvScanParams) -> float:
    """Mean latency of the bounded case summed region by region, without random delays.

    Offsets inside a success interval are received at once; an offset in the
    gap before the next interval waits ``ceil(x / T_a0)`` intervals, ``x``
    being its distance to that interval.
    """
    _check_bounded(params)
    T_a, T_s, d_s = params.T_a0, params.T_s, params.d_s
    windows = [channel_window(ch, params) for ch in ADV_CHANNELS]
    total = 0.0
    for index, window in enumerate(windows):
        following = windows[(index + 1) % 3]
        total += window.d_s_eff * window.d_late
        gap = T_s - d_s + window.d_late - following.d_early
        q = math.floor(gap / T_a)
        r = gap - q * T_a
        total += T_a ** 2 * q * (q + 1) / 2 + (q + 1) * T_a * r + gap * following.d_late
    return total / (3 * T_s)


def select_method(params: AdvScanParams) -> DiscoveryMethod:
    if params.continuous:
        return DiscoveryMethod.CONTINUOUS
    if params.bounded:
        return DiscoveryMethod.BOUNDED
    return DiscoveryMethod.ALGORITHM


def estimate_discovery(params: AdvScanParams, method: Optional[Union[DiscoveryMethod, str]] = None,
                       cfg: AlgoConfig = AlgoConfig()) -> DiscoveryEstimate:
    """Dispatch to one of the estimators; ``None`` picks the closed forms where they hold."""
    chosen = select_method(params) if method is None else DiscoveryMethod(method)
    log.debug(f'discovery method {chosen.value} for T_a0={params.T_a0:g}, T_s={params.T_s:g}, d_s={params.d_s:g}')
    if chosen == DiscoveryMethod.CONTINUOUS:
        return expected_discovery_latency_continuous(params)
    if chosen == DiscoveryMethod.BOUNDED:
        return expected_discovery_latency_bounded(params)
    return expected_discovery_latency(params, cfg)
