"""
Main entry point for noma-lab
Command-line front end: closed-form analysis, Monte Carlo simulation, power
optimization, sweeps and figure presets, each written to CSV
"""
import argparse
import logging
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Optional, Sequence

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import settings
from src.experiments import AXES, COMMANDS, PRESETS, PROBLEMS, ExperimentSpec, parse_sweep, run
from src.exporter import CSVExporter

logger = logging.getLogger('noma_lab')

CSV_HELP = """
CSV columns:
  analyze   cluster,user,legit_rate,eve_rate,secrecy_rate,mode
  simulate  the analyze columns plus legit_se,eve_se,secrecy_se,bound_secrecy,
            difference,bound_exceeds
  optimize  cluster,user,power,legit_rate,eve_rate,secrecy_rate,status,r_o,r_e,objective
  sweep / preset
            preset,series,axis,value,sum_secrecy_rate,min_secrecy_rate,total_power,status
Rates are in bits per channel use; infeasible or divergent cells are NA.
"""


def setup_logging():
    """Configure logging for the application with rotation"""
    from logging.handlers import RotatingFileHandler

    settings.ensure_directories()
    root_logger = logging.getLogger()
    if any(getattr(handler, '_noma_lab', False) for handler in root_logger.handlers):
        return root_logger

    # Create formatters
    file_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    console_formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%H:%M:%S'
    )

    # Rotating file handler (rotates when file reaches max size)
    file_handler = RotatingFileHandler(
        settings.resolve_path(settings.LOG_FILE),
        maxBytes=settings.LOG_MAX_BYTES,
        backupCount=settings.LOG_BACKUP_COUNT,
        encoding='utf-8'
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(file_formatter)

    # Console handler
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(console_formatter)

    for handler in (file_handler, console_handler):
        handler._noma_lab = True
        root_logger.addHandler(handler)
    root_logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper()))

    return root_logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='noma-lab',
        description='Secure massive-MIMO NOMA simulator, closed-form analyzer and power optimizer',
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('command', choices=COMMANDS, help='What to run')
    parser.add_argument('preset', nargs='?', choices=PRESETS, help='Preset name for the preset command')
    parser.add_argument('--scenario', help=f'Scenario file (default: {settings.SCENARIO_FILE})')
    parser.add_argument('--sweep', help=f"AXIS=v1,v2,... with AXIS one of {', '.join(AXES)}; "
                                        "psnr, usnr and qsnr are in dB")
    parser.add_argument('--trials', type=int, default=settings.DEFAULT_TRIALS,
                        help='Monte Carlo trials (>= 100)')
    parser.add_argument('--seed', type=int, default=settings.DEFAULT_SEED, help='Master seed')
    parser.add_argument('--out', help='Output CSV path (default: timestamped file in OUTPUT_DIR)')
    parser.add_argument('--delta-o', type=float, default=None, help='Step of the outer rate search')
    parser.add_argument('--re', type=float, default=None, help='Eavesdropping rate cap r_e')
    parser.add_argument('--ro', type=float, default=None, help='Legitimate rate target r_o')
    parser.add_argument('--problem', choices=PROBLEMS, help='Optimization problem')
    parser.add_argument('--q-max', type=float, default=None, help='Maximum user pilot power (linear)')
    parser.add_argument('--p-tot', type=float, default=None, help='Total BS power budget (linear)')
    parser.add_argument('--search', choices=('bisection', 'stepped'), default=None,
                        help='Outer rate search method')
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    axis, values = parse_sweep(args.sweep) if args.sweep else (None, ())
    return ExperimentSpec(
        command=args.command,
        scenario_path=args.scenario,
        sweep_axis=axis,
        sweep_values=values,
        trials=args.trials,
        master_seed=args.seed,
        output_path=args.out,
        preset=args.preset,
        problem=args.problem,
        r_e=args.re,
        r_o=args.ro,
        q_max=args.q_max,
        p_tot=args.p_tot,
        delta_o=args.delta_o,
        search=args.search,
    )


def execute(spec: ExperimentSpec) -> bool:
    """Run one experiment and write its CSV"""
    start_time = time.time()
    execution_timestamp = datetime.now().strftime('%Y-%m-%d %H:%M:%S')
    label = spec.preset if spec.command == 'preset' else spec.command

    try:
        logger.info("=" * 80)
        logger.info(f"Starting noma-lab {label}")
        logger.info(f"Execution Time: {execution_timestamp}")
        logger.info("=" * 80)

        frame = run(spec)

        exporter = CSVExporter()
        csv_file = exporter.export_to_csv(frame, spec.output_path, command=label)
        if csv_file is None:
            raise IOError("Failed to export CSV file")

        execution_time = time.time() - start_time
        logger.info("=" * 80)
        logger.info("Run Completed Successfully")
        logger.info(f"  Rows written: {len(frame):,}")
        if 'status' in frame.columns:
            counts = frame['status'].value_counts()
            logger.info(f"  Status: {', '.join(f'{k}={v}' for k, v in counts.items())}")
        logger.info(f"  File path: {csv_file}")
        logger.info(f"  Execution time: {execution_time:.2f} seconds")
        logger.info("=" * 80)
        return True

    except Exception as e:
        execution_time = time.time() - start_time
        logger.error("=" * 80)
        logger.error(f"Run Failed: {label}")
        logger.error(f"  Error: {str(e)}")
        logger.error(f"  Execution time: {execution_time:.2f} seconds")
        logger.error("=" * 80)
        logger.exception("Full error traceback:")
        return False


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point with command-line argument handling"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        setup_logging()
        settings.validate()
        spec = spec_from_args(args)
    except Exception as e:
        logger.error(f"Invalid invocation: {str(e)}")
        return 1

    try:
        return 0 if execute(spec) else 1
    except KeyboardInterrupt:
        logger.info("Program interrupted by user")
        return 1


if __name__ == '__main__':
    sys.exit(main())
