"""Command line front end: single points, sweeps and model/simulation comparisons as CSV."""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .device_profile import DeviceProfile, load_bundled_profile, load_profile
from .discovery import AdvScanParams, AlgoConfig, DiscoveryMethod
from .errors import ModelError
from .event_model import (ConnSetupParams, ConnectionParams, PacketExchange, SetupKind, connection_setup_cost,
                          estimate_d_two_ble112)
from .logger import log
from .model_base.constants import PACKET_OVERHEAD_BYTES, Role
from .sensitivity import SensitivityKind, sensitivity_table
from .simulator import QUANTILES, SimConfig, TrialOutcome, summarize
from .sweep_driver.actions import (Action, ConnectedPointAction, DiscoveryPointAction, Row, SimulateChunkAction,
                                   VerifyPointAction)
from .sweep_driver.driver import sweep_driver
from .utils.import_export import export_csv
from .utils.helper import grid, parse_assignment, parse_grid

EXIT_MODEL_ERROR = 1
EXIT_VERIFY_FAILED = 3

DEFAULT_VERIFY_POINTS: Tuple[Tuple[float, float, float], ...] = (
    # continuous scanning
    (0.02, 1.28, 1.28),
    (0.1, 1.28, 1.28),
    (0.02, 1.0, 1.0),
    (0.1, 1.0, 1.0),
    # advertising interval within the scan window
    (0.05, 3.12, 1.28),
    (0.2, 3.12, 1.28),
    (0.5, 3.12, 1.28),
    (0.1, 3.12, 0.64),
    # advertising interval longer than the scan window, away from couplings
    (1.5, 3.12, 1.28),
    (2.0, 3.12, 1.28),
    (0.8, 3.12, 0.64),
    (1.5, 3.12, 0.64),
)

_METHODS = {
    'auto': None,
    'algorithm': DiscoveryMethod.ALGORITHM,
    'continuous': DiscoveryMethod.CONTINUOUS,
    'bounded': DiscoveryMethod.BOUNDED,
}
_CONNECTED_DEFAULTS: Dict[str, float] = {'tc': 0.1, 'pairs': 1, 'rx': 0, 'tx': 0, 'dbm': 3.0, 'slave_latency': 0}
_DISCOVERY_DEFAULTS: Dict[str, float] = {'ta': 0.1, 'ts': 3.12, 'ds': 1.28}


def _grid_arg(text: str) -> List[float]:
    try:
        return parse_grid(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _assignment_arg(text: str) -> Tuple[str, float]:
    try:
        return parse_assignment(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _points_arg(text: str) -> List[Tuple[float, float, float]]:
    points = []
    for item in filter(None, (part.strip() for part in text.split(';'))):
        values = item.split(',')
        if len(values) != 3:
            raise argparse.ArgumentTypeError(f'expected Ta,Ts,ds, got {item!r}')
        try:
            T_a, T_s, d_s = map(float, values)
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e))
        points.append((T_a, T_s, d_s))
    if not points:
        raise argparse.ArgumentTypeError('no points given')
    return points


def _scenario_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--role', choices=[r.value for r in Role], default=Role.SLAVE.value)
    parent.add_argument('--tc', type=float, required=True, help='connection interval in s')
    parent.add_argument('--pairs', type=int, default=1, help='packet pairs per connection event')
    parent.add_argument('--rx', type=int, default=0, help='bytes received per packet')
    parent.add_argument('--tx', type=int, default=0, help='bytes sent per packet')
    parent.add_argument('--dbm', type=float, default=3.0, help='tx power in dBm')
    parent.add_argument('--slave-latency', type=float, default=0.0, help='average number of skipped events')
    return parent


def _algo_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--method', choices=list(_METHODS), default='auto')
    parent.add_argument('--epsilon', type=float, default=0.9999)
    parent.add_argument('--delta', type=float, default=None, help='offset step in s (default T_s / 33.3)')
    parent.add_argument('--dexp-max', type=float, default=1000.0, help='abort threshold in s')
    parent.add_argument('--compare', action='store_true', help='add algorithm and bounded columns')
    parent.add_argument('--charges', action='store_true', help='add advertiser and scanner charges')
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ble-energy-model',
                                     description='Energy and discovery latency of Bluetooth Low Energy devices.',
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--profile', default=None, help='device profile (default: bundled BLE112)')
    parser.add_argument('--seed', type=int, default=0, help='simulation seed')
    parser.add_argument('--out', default=None, help='CSV output file (default: stdout)')
    parser.add_argument('--workers', type=int, default=2, help='sweep worker threads')
    parser.add_argument('-v', '--verbose', action='count', default=0)

    commands = parser.add_subparsers(dest='command', required=True)
    scenario = _scenario_parent()
    algo = _algo_parent()

    connected = commands.add_parser('connected', parents=[scenario], help='charge of a connection interval')
    connected.add_argument('--tg', type=float, default=None, help='horizon in s for the total charge')
    connected.add_argument('--overhead', type=int, default=PACKET_OVERHEAD_BYTES, help='protocol bytes per packet')
    connected.set_defaults(handler=cmd_connected)

    discovery = commands.add_parser('discovery', parents=[algo], help='expected discovery latency')
    discovery.add_argument('--ta', type=_grid_arg, required=True, help='T_a in s, VALUE or START:STOP:STEP')
    discovery.add_argument('--ts', type=float, required=True, help='scan interval in s')
    discovery.add_argument('--ds', type=float, required=True, help='scan window in s')
    discovery.set_defaults(handler=cmd_discovery)

    setup = commands.add_parser('setup', help='charge of connection establishment or update')
    setup.add_argument('--kind', choices=[k.value for k in SetupKind], default=SetupKind.ESTABLISH.value)
    setup.add_argument('--role', choices=[r.value for r in Role], default=Role.SLAVE.value)
    setup.add_argument('--tc-new', type=float, required=True)
    setup.add_argument('--tc-old', type=float, default=None)
    setup.add_argument('--dtw', type=float, default=None, help='transmit window in s')
    setup.add_argument('--dp', type=float, default=None, help='offset of the first packet in the window')
    setup.add_argument('--dtwo', type=float, default=None, help='transmit window offset in s')
    setup.add_argument('--worst-case', action='store_true')
    setup.add_argument('--include-event', action='store_true')
    setup.set_defaults(handler=cmd_setup)

    sensitivity = commands.add_parser('sensitivity', parents=[scenario], help='per-phase sensitivity table')
    sensitivity.add_argument('--kind', choices=['duration', 'current', 'both'], default='both')
    sensitivity.set_defaults(handler=cmd_sensitivity)

    verify = commands.add_parser('verify', parents=[algo], help='model against simulation')
    verify.add_argument('--points', type=_points_arg, default=None, help='"Ta,Ts,ds;..." in s')
    verify.add_argument('--trials', type=int, default=5000)
    verify.add_argument('--tolerance', type=float, default=0.10)
    verify.add_argument('--max-sim-time', type=float, default=1000.0)
    verify.set_defaults(handler=cmd_verify)

    simulate = commands.add_parser('simulate', help='per-trial discovery simulation')
    simulate.add_argument('--ta', type=float, required=True)
    simulate.add_argument('--ts', type=float, required=True)
    simulate.add_argument('--ds', type=float, required=True)
    simulate.add_argument('--trials', type=int, default=5000)
    simulate.add_argument('--max-sim-time', type=float, default=1000.0)
    simulate.add_argument('--summary-only', action='store_true')
    simulate.set_defaults(handler=cmd_simulate)

    sweep = commands.add_parser('sweep', help='sweep one parameter')
    targets = sweep.add_subparsers(dest='target', required=True)
    for name, defaults, parents in (('connected', _CONNECTED_DEFAULTS, []), ('discovery', _DISCOVERY_DEFAULTS, [algo])):
        target = targets.add_parser(name, parents=parents)
        target.add_argument('--variable', choices=list(defaults), required=True)
        target.add_argument('--start', type=float, required=True)
        target.add_argument('--stop', type=float, required=True)
        target.add_argument('--step', type=float, required=True)
        target.add_argument('--fixed', type=_assignment_arg, action='append', default=[], metavar='NAME=VALUE')
        if name == 'connected':
            target.add_argument('--role', choices=[r.value for r in Role], default=Role.SLAVE.value)
            target.add_argument('--tg', type=float, default=None)
            target.add_argument('--overhead', type=int, default=PACKET_OVERHEAD_BYTES)
        target.set_defaults(handler=cmd_sweep, defaults=defaults)

    return parser


def _algo_config(args: argparse.Namespace) -> AlgoConfig:
    return AlgoConfig(epsilon=args.epsilon, delta=args.delta, d_exp_max=args.dexp_max)


def _run(args: argparse.Namespace, actions: Sequence[Action]) -> List[Action]:
    return sweep_driver(args.workers).run(actions)


def _rows(actions: Sequence[Action]) -> List[Row]:
    return [getattr(action, 'row') for action in actions]


def _connected_action(index: int, profile: DeviceProfile, args: argparse.Namespace,
                      values: Dict[str, float]) -> ConnectedPointAction:
    return ConnectedPointAction(None, index, profile, Role(args.role), values['tc'], int(values['pairs']),
                                int(values['rx']), int(values['tx']), values['dbm'], values['slave_latency'],
                                T_g=args.tg, overhead=args.overhead)


def _discovery_action(index: int, profile: DeviceProfile, args: argparse.Namespace,
                      values: Dict[str, float]) -> DiscoveryPointAction:
    params = AdvScanParams.from_profile(profile, values['ta'], values['ts'], values['ds'])
    return DiscoveryPointAction(None, index, profile, params, _METHODS[args.method], _algo_config(args),
                                compare=args.compare, charges=args.charges)


def cmd_connected(args: argparse.Namespace, profile: DeviceProfile) -> Tuple[List[Row], int]:
    values = {'tc': args.tc, 'pairs': args.pairs, 'rx': args.rx, 'tx': args.tx, 'dbm': args.dbm,
              'slave_latency': args.slave_latency}
    return _rows(_run(args, [_connected_action(0, profile, args, values)])), 0


def cmd_discovery(args: argparse.Namespace, profile: DeviceProfile) -> Tuple[List[Row], int]:
    actions = [_discovery_action(i, profile, args, {'ta': T_a, 'ts': args.ts, 'ds': args.ds})
               for i, T_a in enumerate(args.ta)]
    return _rows(_run(args, actions)), 0


def cmd_setup(args: argparse.Namespace, profile: DeviceProfile) -> Tuple[List[Row], int]:
    if args.worst_case:
        setup = ConnSetupParams.worst_case(args.tc_new, args.tc_old)
    elif args.dtw is None and args.dp is None and args.dtwo is None:
        setup = ConnSetupParams.typical(args.tc_new, args.tc_old)
    else:
        d_two = estimate_d_two_ble112(args.tc_new) if args.dtwo is None else args.dtwo
        setup = ConnSetupParams(T_c_new=args.tc_new, d_tw=3e-3 if args.dtw is None else args.dtw, d_two=d_two,
                                d_p=args.dp, T_c_old=args.tc_old)
    cost = connection_setup_cost(profile, setup, args.kind, args.role, include_event=args.include_event)
    return [{
        'kind': args.kind,
        'role': args.role,
        'T_c_new_s': setup.T_c_new,
        'T_c_old_s': '' if setup.T_c_old is None else setup.T_c_old,
        'd_tw_s': setup.d_tw,
        'd_p_s': setup.d_p,
        'd_two_s': setup.d_two,
        'charge_C': cost.charge,
        'duration_s': cost.duration,
    }], 0


def cmd_sensitivity(args: argparse.Namespace, profile: DeviceProfile) -> Tuple[List[Row], int]:
    params = ConnectionParams(T_c=args.tc, role=Role(args.role), N_sl_avg=args.slave_latency, tx_power=args.dbm,
                              sca_slave_ppm=profile.sca_ppm)
    exchange = PacketExchange.same_payload(args.pairs, args.rx, args.tx)
    kinds = tuple(SensitivityKind) if args.kind == 'both' else (SensitivityKind(args.kind),)
    return [{
        'phase': report.phase,
        'kind': report.kind.value,
        'occurrences': report.occurrences,
        'S_A_or_s': report.S,
        'delta_Q_C': report.delta_Q,
        'Q_total_C': report.Q_total,
        'relative_change': report.relative_change,
    } for report in sensitivity_table(profile, params, exchange, kinds)], 0


def cmd_verify(args: argparse.Namespace, profile: DeviceProfile) -> Tuple[List[Row], int]:
    points = args.points or DEFAULT_VERIFY_POINTS
    actions = [VerifyPointAction(None, i, SimConfig(AdvScanParams.from_profile(profile, T_a, T_s, d_s), args.trials,
                                                    args.seed, args.max_sim_time),
                                 tolerance=args.tolerance, method=_METHODS[args.method],
                                 algo=_algo_config(args))
               for i, (T_a, T_s, d_s) in enumerate(points)]
    done = _run(args, actions)
    failed = [action for action in done if getattr(action, 'status') == 'fail']
    for action in failed:
        log.warning(f'verify point #{action.index} outside tolerance {args.tolerance:g}')
    return _rows(done), EXIT_VERIFY_FAILED if failed else 0


def _trial_row(index: int, outcome: TrialOutcome) -> Row:
    return {
        'trial': index,
        'latency_s': '' if outcome.truncated else outcome.latency,
        'events': outcome.events_sent,
        'channel': '' if outcome.hit_channel is None else outcome.hit_channel,
        'truncated': int(outcome.truncated),
    }


def cmd_simulate(args: argparse.Namespace, profile: DeviceProfile) -> Tuple[List[Row], int]:
    cfg = SimConfig(AdvScanParams.from_profile(profile, args.ta, args.ts, args.ds), args.trials, args.seed,
                    args.max_sim_time)
    chunk = -(-cfg.trials // max(args.workers, 1))
    actions = [SimulateChunkAction(None, i, cfg, first, chunk) for i, first in enumerate(range(0, cfg.trials, chunk))]
    outcomes = [o for action in _run(args, actions) for o in getattr(action, 'outcomes')]
    summary = summarize(outcomes)
    log.info(f'{summary.trials} trials: mean {summary.mean:g} s, std {summary.std:g} s, '
             f'{summary.truncated} truncated')
    if not args.summary_only:
        return [_trial_row(i, o) for i, o in enumerate(outcomes)], 0
    row: Row = {'trials': summary.trials, 'truncated': summary.truncated, 'mean_s': summary.mean,
                'std_s': summary.std, 'stderr_s': summary.stderr}
    row.update({f'q{int(q * 100)}_s': summary.quantiles.get(q, '') for q in QUANTILES})
    return [row], 0


_SWEEP_ACTIONS: Dict[str, Callable[..., Action]] = {
    'connected': _connected_action,
    'discovery': _discovery_action,
}


def cmd_sweep(args: argparse.Namespace, profile: DeviceProfile) -> Tuple[List[Row], int]:
    values = dict(args.defaults)
    for name, value in args.fixed:
        if name not in values:
            raise ModelError(f'unknown {args.target} parameter {name!r} (known: {", ".join(values)})')
        values[name] = value
    try:
        points = grid(args.start, args.stop, args.step)
    except ValueError as e:
        raise ModelError(str(e)) from e
    log.debug(f'sweep {args.target}.{args.variable}: {len(points)} points')
    make = _SWEEP_ACTIONS[args.target]
    actions = [make(i, profile, args, {**values, args.variable: point}) for i, point in enumerate(points)]
    return _rows(_run(args, actions)), 0


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s', stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    try:
        profile = load_bundled_profile() if args.profile is None else load_profile(args.profile)
        handler: Callable[[argparse.Namespace, DeviceProfile], Tuple[List[Row], int]] = args.handler
        rows, status = handler(args, profile)
        error: Optional[Exception] = export_csv(rows, args.out)
        if error is not None:
            raise error
    except (ModelError, OSError) as e:
        print(f'error: {type(e).__name__}: {e}', file=sys.stderr)
        return EXIT_MODEL_ERROR
    return status


def run() -> None:
    sys.exit(main())

