import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..types import codes
from ..types.defaults import PreconfiguredDefaults
from ..types.errors import AcmfError, ConfigValidationError
from . import config as configuration
from .interface import extract_interface, write_vtk
from .scenario import run_scenario
from .snapshot import read_snapshot
from .sweep import convergence_sweep

logger = logging.getLogger(__name__)


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    logging.captureWarnings(True)


def _resolve_config(name: str) -> Path:
    # a path on disk wins over a bundled scenario of the same name
    path = Path(name)
    if path.exists():
        return path
    try:
        return configuration.bundled_scenario(name)
    except FileNotFoundError:
        return path


def _cmd_run(args: argparse.Namespace) -> int:
    config = configuration.load_config(_resolve_config(args.config))
    report = run_scenario(config, args.output)
    if report.exit_code:
        print(f"{config.name}: {report.code}: {report.message}", file=sys.stderr)
    else:
        print(f"{config.name}: ok ({report.records} records, t = {report.final_t:.6g})")
    return report.exit_code


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = configuration.load_config(_resolve_config(args.config))
    table = convergence_sweep(config, args.eps, ratio=args.ratio, time=args.time, directory=args.output, workers=args.workers)
    for row in table.rows:
        print(
            f"eps={row.eps:<8g} n={row.n:<5d} radius_error={row.radius_error} "
            f"discrepancy={row.discrepancy} C2={row.C2} energy={row.energy} {row.error}"
        )
    for name, flag in table.trends.items():
        print(f"{name}: {flag}")
    return max((row.exit_code for row in table.rows), default=codes.ExitOk)


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        config = configuration.load_config(_resolve_config(args.config))
    except ConfigValidationError as exc:
        for error in exc.errors:
            print(f"{exc.code}: {error}", file=sys.stderr)
        return exc.exit_code
    print(f"{config.name}: valid")
    return codes.ExitOk


def _cmd_extract(args: argparse.Namespace) -> int:
    state, _ = read_snapshot(args.snapshot)
    path = write_vtk(extract_interface(state), args.output)
    print(f"wrote {path}")
    return codes.ExitOk


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acmf", description="Allen-Cahn flow with obstacles on the flat torus")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one scenario")
    run.add_argument("config", help="scenario file or bundled scenario name")
    run.add_argument("-o", "--output", type=Path, help="output directory (default: [output].directory)")
    run.set_defaults(handler=_cmd_run)

    sweep = commands.add_parser("sweep", help="run a scenario over several eps with eps/h fixed")
    sweep.add_argument("config")
    sweep.add_argument("--eps", type=float, nargs="+", required=True)
    sweep.add_argument(
        "--ratio",
        type=float,
        default=PreconfiguredDefaults.sweep_ratio,
        help="eps/h kept fixed across entries",
    )
    sweep.add_argument("--time", type=float, help="override t_end for every entry")
    sweep.add_argument("--workers", type=int, help="worker processes (capped by ACMF_THREADS)")
    sweep.add_argument("-o", "--output", type=Path)
    sweep.set_defaults(handler=_cmd_sweep)

    validate = commands.add_parser("validate", help="check a scenario file and list every problem")
    validate.add_argument("config")
    validate.set_defaults(handler=_cmd_validate)

    extract = commands.add_parser("extract", help="write the zero level set of a snapshot as legacy VTK")
    extract.add_argument("snapshot", type=Path)
    extract.add_argument("-o", "--output", type=Path, required=True)
    extract.set_defaults(handler=_cmd_extract)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except AcmfError as exc:
        logger.error("%s: %s", exc.code, exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
