"""
Command-line front end.

    crs-noma-lab rate-sweep   [system flags] [rho flags] [--scheme noma|oma] [--a2 VALUE|opt]
    crs-noma-lab outage-sweep [system flags] [rho flags] [--a2 VALUE|opt]
    crs-noma-lab optimize-a2  [system flags] [rho flags] [--refine]
    crs-noma-lab validate     [system flags] [rho flags] [--a2 VALUE|opt]
    crs-noma-lab figure {fig2,...,fig8}

Exit codes: 0 success, 1 validation bound violated, 2 I/O failure, 3 numerical failure,
64 usage error.
"""
import argparse
from dataclasses import dataclass
from typing import Optional, Union

from crsnomalab.analysis.channel_model import CombinerKind, LinkSpec, SystemConfig, ccdf_terms
from crsnomalab.analysis.power_opt import optimal_a2_sweep, refine_a2
from crsnomalab.core import logger
from crsnomalab.core.config import APP_NAME, VERSION, LabConfiguration
from crsnomalab.core.config_manager import all_figure_presets, rho_grid
from crsnomalab.core.errors import ConfigurationError, DomainError, LabError, NumericalFailure, UsageError
from crsnomalab.core.event_bus import SWEEP_POINT_DONE, create_or_get_shared_event_bus
from crsnomalab.core.logger import configure_logger
from crsnomalab.core.logging_utils import log_expansion_terms, log_system_config
from crsnomalab.core.profiler import profile_function
from crsnomalab.core.thread_manager import get_thread_manager, shutdown_thread_managers
from crsnomalab.reports.csv_io import write_csv
from crsnomalab.reports.figures import run_figure
from crsnomalab.sim.simulator import Metric, Scheme, SweepRow, run_sweep

COMMANDS = ('rate-sweep', 'outage-sweep', 'optimize-a2', 'validate', 'figure')
OPT_COLUMNS = ('rho_db', 'combiner', 'm_sr', 'm_sd', 'm_rd', 'n_r', 'n_d', 'a2_star', 'outage_at_star', 'feasible')

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64

# a2 carried by the SystemConfig of an a2=opt run until the per-rho optimum replaces it
_PLACEHOLDER_A2 = 0.1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunSpec:
    command: str
    config: SystemConfig
    rho_start_db: float
    rho_stop_db: float
    rho_step_db: float
    trials: int
    seed: int
    a2_mode: Union[str, float]
    scheme: Scheme = Scheme.NOMA
    out_path: Optional[str] = None
    preset: Optional[str] = None
    refine: bool = False
    profile: bool = False
    log_dir: Optional[str] = None

    @property
    def optimize(self) -> bool:
        return self.a2_mode == 'opt'

    def rho_grid_db(self):
        return rho_grid(self.rho_start_db, self.rho_stop_db, self.rho_step_db)


def _a2_mode(text):
    if text == 'opt':
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'opt', got {text!r}") from None


def build_parser(configuration=None):
    configuration = configuration or LabConfiguration.get_instance()
    parser = _Parser(prog=APP_NAME, description="CRS-NOMA performance analysis and Monte Carlo validation")
    parser.add_argument('--version', action='version', version=f'{APP_NAME} {VERSION}')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('preset', nargs='?', help='figure preset for the figure command')

    parser.add_argument('--m', type=int, default=1, help='Nakagami shape of every link')
    parser.add_argument('--m-sr', type=int)
    parser.add_argument('--m-sd', type=int)
    parser.add_argument('--m-rd', type=int)
    parser.add_argument('--n', type=int, default=1, help='antennas at relay and destination')
    parser.add_argument('--n-r', type=int)
    parser.add_argument('--n-d', type=int)
    parser.add_argument('--omega-sd', type=float)
    parser.add_argument('--omega-sr', type=float)
    parser.add_argument('--omega-rd', type=float)
    parser.add_argument('--combiner', choices=[c.value for c in CombinerKind], default=CombinerKind.SC.value)
    parser.add_argument('--scheme', choices=[s.value for s in Scheme], default=Scheme.NOMA.value)
    parser.add_argument('--rate-r', type=float, help='target rate R in bps/Hz')
    parser.add_argument('--a2', type=_a2_mode, default='opt', help="power split a2, or 'opt'")
    parser.add_argument('--rho-start-db', type=float)
    parser.add_argument('--rho-stop-db', type=float)
    parser.add_argument('--rho-step-db', type=float)
    parser.add_argument('--trials', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--out', default=None, help="output CSV path ('-' for stdout)")
    parser.add_argument('--refine', action='store_true', help='refine the a2 grid around each optimum')
    parser.add_argument('-c', '--config', dest='config_file', default=None, help='YAML file overriding the defaults')
    return configuration.add_args(parser)


def _pick(value, default):
    return default if value is None else value


def parse_and_validate(argv=None) -> RunSpec:
    """
    Turns argv into a RunSpec. Defaults come from LabConfiguration, after applying the YAML
    file named by --config.

    Raises:
        UsageError: unknown flags, violated invariants, or an invalid preset.
    """
    configuration = LabConfiguration.get_instance()
    args = build_parser(configuration).parse_args(argv)
    try:
        configuration.apply_args(args)
    except ConfigurationError as e:
        raise UsageError(str(e)) from None

    if args.command == 'figure':
        presets = all_figure_presets()
        if args.preset not in presets:
            raise UsageError(f"figure needs one of {', '.join(sorted(presets))}, got {args.preset!r}")
    elif args.preset is not None:
        raise UsageError(f"unexpected argument {args.preset!r} for {args.command}")

    scheme = Scheme(args.scheme)
    if scheme is Scheme.OMA and args.command != 'rate-sweep':
        raise UsageError(f"--scheme oma is only supported by rate-sweep, not {args.command}")
    if args.command == 'optimize-a2' and args.a2 != 'opt':
        raise UsageError("optimize-a2 searches a2 itself; drop --a2")

    default_range = configuration.outage_rho_db if args.command in ('outage-sweep', 'optimize-a2') \
        else configuration.rate_rho_db
    start = _pick(args.rho_start_db, default_range[0])
    stop = _pick(args.rho_stop_db, default_range[1])
    step = _pick(args.rho_step_db, default_range[2])
    if not step > 0:
        raise UsageError(f"--rho-step-db must be > 0, got {step}")
    if start > stop:
        raise UsageError(f"--rho-start-db ({start}) must not exceed --rho-stop-db ({stop})")

    trials = _pick(args.trials, configuration.n_trials)
    if trials < 1:
        raise UsageError(f"--trials must be >= 1, got {trials}")

    a2 = _PLACEHOLDER_A2 if args.a2 == 'opt' else args.a2
    try:
        config = SystemConfig(
            sr=LinkSpec(_pick(args.m_sr, args.m), _pick(args.omega_sr, configuration.omega_sr)),
            sd=LinkSpec(_pick(args.m_sd, args.m), _pick(args.omega_sd, configuration.omega_sd)),
            rd=LinkSpec(_pick(args.m_rd, args.m), _pick(args.omega_rd, configuration.omega_rd)),
            n_r=_pick(args.n_r, args.n),
            n_d=_pick(args.n_d, args.n),
            combiner=CombinerKind(args.combiner),
            a2=a2,
            target_rate=_pick(args.rate_r, configuration.target_rate),
        )
    except ConfigurationError as e:
        raise UsageError(str(e)) from None

    return RunSpec(
        command=args.command,
        config=config,
        rho_start_db=start,
        rho_stop_db=stop,
        rho_step_db=step,
        trials=trials,
        seed=_pick(args.seed, configuration.seed),
        a2_mode=args.a2,
        scheme=scheme,
        out_path=args.out,
        preset=args.preset,
        refine=args.refine,
        profile=configuration.profile,
        log_dir=configuration.log_dir,
    )


def _sweep_table(spec, metric, thread_manager):
    a2_grid = LabConfiguration.get_instance().a2_grid if spec.optimize else None
    return run_sweep(spec.config, spec.rho_grid_db(), spec.scheme, metric, spec.trials, spec.seed,
                     a2_grid=a2_grid, thread_manager=thread_manager)


def _optimize_rows(spec, thread_manager):
    cfg = spec.config
    rows = []
    grid_db = spec.rho_grid_db()
    for rho_db, result in zip(grid_db, optimal_a2_sweep(cfg, grid_db, thread_manager=thread_manager)):
        if spec.refine:
            result = refine_a2(cfg, result.rho, result)
        rows.append((rho_db, cfg.combiner.value, cfg.sr.m, cfg.sd.m, cfg.rd.m, cfg.n_r, cfg.n_d,
                     result.a2_star, result.outage_at_star, result.feasible))
    return rows


def _run(spec: RunSpec):
    """Returns (columns, rows, exit code)."""
    thread_manager = get_thread_manager(LabConfiguration.get_instance().workers)
    if spec.command == 'figure':
        table = run_figure(spec.preset, spec.trials, spec.seed, thread_manager=thread_manager)
        return table.columns, table.rows, EXIT_OK

    log_system_config(spec.config)
    log_expansion_terms(ccdf_terms(spec.config.sd, spec.config.n_d, spec.config.combiner),
                        "[Series] S->D CCDF terms")
    if spec.command == 'optimize-a2':
        return OPT_COLUMNS, _optimize_rows(spec, thread_manager), EXIT_OK
    if spec.command in ('rate-sweep', 'outage-sweep'):
        metric = Metric.RATE if spec.command == 'rate-sweep' else Metric.OUTAGE
        sweep = _sweep_table(spec, metric, thread_manager)
        return SweepRow.columns(), [row.values() for row in sweep], EXIT_OK

    sweep = _sweep_table(spec, Metric.RATE, thread_manager) + _sweep_table(spec, Metric.OUTAGE, thread_manager)
    violations = [row for row in sweep if not row.within_bound()]
    for row in violations:
        logger.error(f"[Validate] bound violated at rho={row.rho_db:g} dB: {row}")
    logger.info(f"[Validate] {len(sweep) - len(violations)}/{len(sweep)} points within bound")
    return SweepRow.columns(), [row.values() for row in sweep], EXIT_VALIDATION if violations else EXIT_OK


def _log_progress(index, total, row):
    logger.info(f"[Sweep] {index + 1}/{total} rho={row.rho_db:g} dB done")


def execute(spec: RunSpec) -> int:
    """Runs the command and writes its CSV; returns the process exit code."""
    bus = create_or_get_shared_event_bus()
    bus.subscribe(SWEEP_POINT_DONE, _log_progress)
    run = profile_function(_run, output_dir=spec.log_dir or '.') if spec.profile else _run
    try:
        columns, rows, code = run(spec)
    except NumericalFailure as e:
        logger.error(f"[CLI] Numerical failure: {e}")
        return EXIT_NUMERICAL
    finally:
        bus.unsubscribe(SWEEP_POINT_DONE, _log_progress)

    try:
        write_csv(spec.out_path, columns, rows, spec.seed)
    except OSError as e:
        logger.error(f"[CLI] Could not write {spec.out_path}: {e}")
        return EXIT_IO
    return code


def main(argv=None) -> int:
    configuration = LabConfiguration.get_instance()
    try:
        spec = parse_and_validate(argv)
    except UsageError as e:
        configure_logger(log_level=configuration.log_level)
        logger.error(f"[CLI] {e}")
        return EXIT_USAGE
    configure_logger(log_dir=configuration.log_dir, log_level=configuration.log_level)
    try:
        return execute(spec)
    except LabError as e:
        logger.error(f"[CLI] {e}")
        return EXIT_USAGE if isinstance(e, DomainError) else EXIT_NUMERICAL
    finally:
        shutdown_thread_managers()
