"""
Command-line entry point for jointsdr.

Subcommands:

* ``ber``           Monte Carlo BER sweep, CSV output (plus ``<stem>.info.csv``)
* ``exit``          EXIT-chart measurement of a soft detector
* ``oracle-check``  exact property suites, non-zero exit status on failure
* ``gen-code``      construct a regular LDPC code and write it as alist

Exit status is 0 on success, 2 on configuration or validation errors and 1 on
solver or unexpected errors.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from jointsdr.coding.alist import write_alist
from jointsdr.coding.ldpc import build_regular_code
from jointsdr.core.config import (
    CodeConfig,
    ExperimentConfig,
    ReceiverType,
    Settings,
    get_settings,
    load_experiment_config,
)
from jointsdr.core.errors import (
    CodeConstructionError,
    ConfigurationError,
    ConstraintLimitError,
    DimensionError,
    JointSdrError,
)
from jointsdr.core.logging import configure_logging, get_logger, set_run_id
from jointsdr.harness.ber import run_ber
from jointsdr.harness.checks import run_oracle_checks
from jointsdr.harness.exit import run_exit
from jointsdr.harness.results import write_ber_csv, write_exit_csv
from jointsdr.observability.metrics import setup_metrics, write_metrics

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

_CONFIG_ERRORS = (ConfigurationError, CodeConstructionError, ConstraintLimitError, DimensionError)


def _snr_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid SNR list: {text}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jointsdr", description="LDPC-coded MIMO detection with joint SDR")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="Experiment file (.json or key = value lines)")
        p.add_argument("--seed", type=int, help="Master seed")
        p.add_argument("--snr", type=_snr_list, help="Comma separated SNR grid in dB")
        p.add_argument("--receiver", choices=[r.value for r in ReceiverType], help="Receiver to simulate")
        p.add_argument("--out", type=Path, required=True, help="Output CSV")
        return p

    ber = experiment("ber", "Simulate BER curves")
    ber.add_argument("--dump-sdpa", type=Path, help="Write the first SDP of the run in SDPA sparse format")
    experiment("exit", "Measure detector EXIT characteristics")

    check = sub.add_parser("oracle-check", help="Run the exact property suites")
    check.add_argument("--seed", type=int, default=0)

    gen = sub.add_parser("gen-code", help="Construct a regular LDPC code")
    gen.add_argument("--config", type=Path, help="Experiment file whose code section is used")
    gen.add_argument("--nc", type=int)
    gen.add_argument("--kc", type=int)
    gen.add_argument("--col-weight", type=int)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", type=Path, required=True, help="Output alist file")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "seed": args.seed,
        "snr_db": args.snr,
        "receiver": args.receiver,
        "dump_sdpa": getattr(args, "dump_sdpa", None),
    }


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    overrides = _overrides(args)
    if args.config is not None:
        return load_experiment_config(args.config, overrides)
    return ExperimentConfig.model_validate({k: v for k, v in overrides.items() if v is not None})


def _cmd_ber(args: argparse.Namespace, settings: Settings) -> int:
    config = _experiment(args)
    records = run_ber(config, settings)
    companion = write_ber_csv(records, args.out)
    for record in records:
        print(
            f"{record.snr_db:6.2f} dB  iter {record.iteration}  "
            f"BER {record.ber:.3e}  ({record.bit_errors}/{record.bits})"
        )
    print(f"wrote {args.out} and {companion}")
    return EXIT_OK


def _cmd_exit(args: argparse.Namespace, settings: Settings) -> int:
    config = _experiment(args)
    records = run_exit(config, settings)
    write_exit_csv(records, args.out)
    for record in records:
        print(f"{record.snr_db:6.2f} dB  I_A {record.i_a:.3f}  I_E {record.i_e:.4f}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_oracle_check(args: argparse.Namespace, settings: Settings) -> int:
    results = run_oracle_checks(args.seed)
    for result in results:
        mark = "PASS" if result.passed else "FAIL"
        print(f"{mark}  {result.name}  instances={result.instances} failures={result.failures}  {result.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


def _cmd_gen_code(args: argparse.Namespace, settings: Settings) -> int:
    base = load_experiment_config(args.config).code if args.config is not None else CodeConfig()
    values = base.model_dump()
    for key, value in (("nc", args.nc), ("kc", args.kc), ("col_weight", args.col_weight), ("seed", args.seed)):
        if value is not None:
            values[key] = value
    cfg = CodeConfig.model_validate(values)
    code = build_regular_code(cfg.nc, cfg.kc, cfg.col_weight, np.random.default_rng(cfg.seed))
    write_alist(code, args.out)
    print(f"wrote ({code.nc},{code.kc}) code with {code.m} checks to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "ber": _cmd_ber,
    "exit": _cmd_exit,
    "oracle-check": _cmd_oracle_check,
    "gen-code": _cmd_gen_code,
}


def run(argv: Optional[List[str]] = None, settings: Optional[Settings] = None) -> int:
    """Parse ``argv``, run the subcommand and return the process exit status."""
    args = build_parser().parse_args(argv)
    settings = settings or get_settings()

    configure_logging(settings)
    setup_metrics()
    run_id = set_run_id()
    logger = get_logger("main")
    logger.info("Starting jointsdr", command=args.command, version=settings.version, run_id=run_id)

    try:
        status = _COMMANDS[args.command](args, settings)
    except ValidationError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except JointSdrError as exc:
        logger.error("Run failed", error_type=exc.error_code, error=exc.message)
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as exc:
        logger.exception("Unexpected error")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    if settings.metrics_textfile is not None:
        write_metrics(settings.metrics_textfile)
    return status


def main() -> None:
    """Console script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
