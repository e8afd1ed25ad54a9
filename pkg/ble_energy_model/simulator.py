"""Discrete-event simulation of one advertiser discovering one scanner.

Each trial runs a scanner process and an advertiser process in its own
``simpy`` environment. The scanner has been scanning since ``t = 0`` and
switches channel 37, 38, 39 with every scan window. The advertiser starts
at a random offset in ``[0, 3 T_s)`` and sends one packet per channel and
event; a packet is received if it lies completely inside a scan window on
the same channel.

Trial ``i`` draws from ``numpy.random.default_rng`` seeded with the ``i``-th
child of ``SeedSequence(seed)``, so results do not depend on the order in
which trials are run.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Generator, List, Optional, Sequence, Tuple

import numpy as np
import simpy

from .aggregate import AdvertiserEnergyInputs
from .device_profile import DeviceProfile
from .discovery import AdvScanParams, channel_window
from .errors import ParameterRangeError
from .event_model import ScanMode, scan_event_cost
from .logger import log
from .model_base.constants import ADV_CHANNELS

QUANTILES = (0.5, 0.9, 0.99)


@dataclass(frozen=True)
class SimConfig:
    params: AdvScanParams
    trials: int = 5000
    seed: int = 0
    max_sim_time: float = 1000.0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ParameterRangeError('trials', self.trials, (1, None))
        if self.max_sim_time <= 0:
            raise ParameterRangeError('max_sim_time', self.max_sim_time, (0, None))
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterRangeError('seed', self.seed, (0, 2 ** 64 - 1))


@dataclass(frozen=True)
class TrialOutcome:
    latency: float
    events_sent: int
    hit_channel: Optional[int]
    truncated: bool = False
    phi: float = 0.0


@dataclass(frozen=True)
class SimSummary:
    trials: int
    truncated: int
    mean: float
    std: float
    stderr: float
    quantiles: Dict[float, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SimChargeSummary:
    advertiser_mean: float
    scanner_mean: float
    scanner_sleep_mean: float
    trials: int


def trial_seeds(seed: int, trials: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(trials)


def success_channel(t: float, params: AdvScanParams) -> Optional[int]:
    """Channel on which an event starting at ``t`` is received, by the start-interval test.

    Scan window ``k`` listens on channel ``37 + k mod 3``; the event hits on
    ``ch`` if ``t`` lies in ``[k T_s - d_early, k T_s + d_s - d_late]``.
    """
    for index, ch in enumerate(ADV_CHANNELS):
        window = channel_window(ch, params)
        k = math.floor((t + window.d_early) / params.T_s)
        if k % 3 == index and k * params.T_s - window.d_early <= t <= k * params.T_s + params.d_s - window.d_late:
            return ch
    return None


def packet_overlap_channel(t: float, params: AdvScanParams) -> Optional[int]:
    """Same question as :func:`success_channel`, answered on a packet timeline."""
    packets = [(ch, t + index * (params.d_a + params.d_ch)) for index, ch in enumerate(ADV_CHANNELS)]
    first = math.floor(t / params.T_s) - 1
    last = math.floor((packets[-1][1] + params.d_a) / params.T_s) + 1
    windows = [(ADV_CHANNELS[k % 3], k * params.T_s, k * params.T_s + params.d_s) for k in range(first, last + 1)]
    for ch, start in packets:
        end = start + params.d_a
        if any(scan_ch == ch and scan_start <= start and end <= scan_end for scan_ch, scan_start, scan_end in windows):
            return ch
    return None


class _Scanner:
    def __init__(self, env: simpy.Environment, params: AdvScanParams) -> None:
        self.env = env
        self.params = params
        self.window: Tuple[int, float, float] = (ADV_CHANNELS[0], 0.0, params.d_s)
        self.process = env.process(self.run())

    def run(self) -> Generator[simpy.Event, None, None]:
        k = 0
        while True:
            start = k * self.params.T_s
            self.window = (ADV_CHANNELS[k % 3], start, start + self.params.d_s)
            k += 1
            yield self.env.timeout(max(k * self.params.T_s - self.env.now, 0.0))

    def receives(self, ch: int, start: float, end: float) -> bool:
        scan_ch, scan_start, scan_end = self.window
        return scan_ch == ch and scan_start <= start and end <= scan_end


class _Advertiser:
    def __init__(self, env: simpy.Environment, params: AdvScanParams, scanner: _Scanner,
                 rng: np.random.Generator, phi: float) -> None:
        self.env = env
        self.params = params
        self.scanner = scanner
        self.rng = rng
        self.phi = phi
        self.events_sent = 0
        self.hit: Optional[Tuple[int, float]] = None
        self.process = env.process(self.run())

    def run(self) -> Generator[simpy.Event, None, None]:
        params = self.params
        yield self.env.timeout(self.phi)
        while True:
            start = self.env.now
            self.events_sent += 1
            for index, ch in enumerate(ADV_CHANNELS):
                yield self.env.timeout(max(start + index * (params.d_a + params.d_ch) - self.env.now, 0.0))
                packet_start = self.env.now
                if self.scanner.receives(ch, packet_start, packet_start + params.d_a):
                    self.hit = (ch, packet_start + params.d_a)
                    return
            rho = self.rng.uniform(0.0, params.rho_max)
            yield self.env.timeout(max(start + params.T_a0 + rho - self.env.now, 0.0))


def simulate_trial(params: AdvScanParams, seed: np.random.SeedSequence, max_sim_time: float) -> TrialOutcome:
    rng = np.random.default_rng(seed)
    phi = float(rng.uniform(0.0, 3 * params.T_s))
    env = simpy.Environment()
    scanner = _Scanner(env, params)
    advertiser = _Advertiser(env, params, scanner, rng, phi)
    env.run(until=simpy.AnyOf(env, [advertiser.process, env.timeout(max_sim_time)]))
    if advertiser.hit is None:
        return TrialOutcome(math.nan, advertiser.events_sent, None, truncated=True, phi=phi)
    ch, end = advertiser.hit
    return TrialOutcome(end - phi, advertiser.events_sent, ch, phi=phi)


def run_trials(cfg: SimConfig, first: int = 0, count: Optional[int] = None) -> List[TrialOutcome]:
    """Trials ``first`` to ``first + count`` of ``cfg``, identical to the same slice of a full run."""
    seeds = trial_seeds(cfg.seed, cfg.trials)
    end = cfg.trials if count is None else min(first + count, cfg.trials)
    return [simulate_trial(cfg.params, seeds[i], cfg.max_sim_time) for i in range(first, end)]


def summarize(outcomes: Sequence[TrialOutcome]) -> SimSummary:
    latencies = sorted(o.latency for o in outcomes if not o.truncated)
    truncated = len(outcomes) - len(latencies)
    if truncated:
        log.warning(f'{truncated} of {len(outcomes)} trials reached max_sim_time without discovery')
    if not latencies:
        return SimSummary(len(outcomes), truncated, math.nan, math.nan, math.nan)
    n = len(latencies)
    mean = math.fsum(latencies) / n
    std = math.sqrt(math.fsum((x - mean) ** 2 for x in latencies) / (n - 1)) if n > 1 else 0.0
    quantiles = {q: float(np.quantile(latencies, q)) for q in QUANTILES}
    return SimSummary(len(outcomes), truncated, mean, std, std / math.sqrt(n), quantiles)


def simulate_discovery(cfg: SimConfig) -> Tuple[List[TrialOutcome], SimSummary]:
    log.debug(f'simulating {cfg.trials} trials of {cfg.params}, seed {cfg.seed}')
    outcomes = run_trials(cfg)
    return outcomes, summarize(outcomes)


def advertiser_trial_charge(outcome: TrialOutcome, params: AdvScanParams, inputs: AdvertiserEnergyInputs) -> float:
    """Charge of the advertiser in one trial.

    Every event before the hit is a full event, the hit event ends on the
    hit channel, and the advertiser sleeps in between.
    """
    if outcome.truncated or outcome.hit_channel is None:
        raise ParameterRangeError('outcome', outcome.latency, detail='truncated trial has no charge')
    missed = outcome.events_sent - 1
    last = {37: inputs.Q_37, 38: inputs.Q_38, 39: inputs.Q_39}[outcome.hit_channel]
    hit_start = outcome.latency - channel_window(outcome.hit_channel, params).d_late
    sleep = max(hit_start - missed * inputs.d_full, 0.0)
    return missed * inputs.Q_full + sleep * inputs.I_sl + last


def _active_time(x: float, T_s: float, d_s: float) -> float:
    """Time spent inside scan windows between 0 and ``x``."""
    periods, rest = divmod(x, T_s)
    return periods * d_s + min(rest, d_s)


def scanner_trial_charge(outcome: TrialOutcome, params: AdvScanParams, profile: DeviceProfile) -> Tuple[float, float]:
    """Scanner charge and its sleep part while the advertiser is undiscovered.

    The charge of an idle scan event is spread evenly over its scan window.
    """
    if outcome.truncated:
        raise ParameterRangeError('outcome', outcome.latency, detail='truncated trial has no charge')
    start, end = outcome.phi, outcome.phi + outcome.latency
    active = _active_time(end, params.T_s, params.d_s) - _active_time(start, params.T_s, params.d_s)
    Q_idle = scan_event_cost(profile, ScanMode.PASSIVE_OR_IDLE, params.d_s).charge
    sleep = (outcome.latency - active) * profile.I_sl
    return active / params.d_s * Q_idle + sleep, sleep


def simulate_discovery_charge(cfg: SimConfig, profile: DeviceProfile,
                              inputs: AdvertiserEnergyInputs) -> SimChargeSummary:
    outcomes = [o for o in run_trials(cfg) if not o.truncated]
    if not outcomes:
        return SimChargeSummary(math.nan, math.nan, math.nan, 0)
    advertiser = [advertiser_trial_charge(o, cfg.params, inputs) for o in outcomes]
    scanner = [scanner_trial_charge(o, cfg.params, profile) for o in outcomes]
    n = len(outcomes)
    return SimChargeSummary(advertiser_mean=math.fsum(advertiser) / n,
                            scanner_mean=math.fsum(q for q, _ in scanner) / n,
                            scanner_sleep_mean=math.fsum(s for _, s in scanner) / n,
                            trials=n)
