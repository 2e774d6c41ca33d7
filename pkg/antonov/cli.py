"""Command line surface: ``antonov <command> [--config FILE] [--set key=value ...]``.

Every command loads a RunConfig (file, then shortcuts, then ``--set``), runs its
use case and prints a JSON summary on stdout. Failures map to exit codes:
2 for invalid input or violated preconditions, 3 for solver and filesystem
failures, 4 for acceptance thresholds that were not met.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from antonov.application.use_cases import USE_CASES
from antonov.core.errors import EXIT_OK, AppError, ValidationError, exit_code_for
from antonov.core.observability.logging_config import setup_logging
from antonov.core.version import get_version_string
from antonov.domain.run_config import INITIAL_DATA, PROFILES, RunConfig, load_run_config

logger = logging.getLogger(__name__)

# flag -> RunConfig field
SHORTCUTS: dict[str, tuple[str, type, str]] = {
    "--profile": ("profile", str, "steady-state family"),
    "--k": ("k", float, "polytrope exponent"),
    "--depth": ("depth", float, "well depth h = E0 - Emin"),
    "--mass": ("mass", float, "target mass (replaces --depth)"),
    "--lmax": ("lmax", int, "number of angular modes"),
    "--n-energy": ("n_energy", int, "energy nodes of the mode grid"),
    "--n-beta": ("n_beta", int, "beta nodes per band segment"),
    "--coupling": ("coupling", float, "multiplier of B"),
    "--horizon": ("horizon", float, "evolution horizon"),
    "--time-steps": ("time_steps", int, "evolution snapshots"),
    "--initial-data": ("initial_data", str, "initial data kind"),
    "--seed": ("seed", int, "random seed"),
    "--workers": ("max_workers", int, "thread pool size"),
    "--output-dir": ("output_dir", str, "root of the run folders"),
    "--cache-dir": ("cache_dir", str, "steady-state cache"),
}


def _parse_assignment(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ValidationError(f"--set expects key=value, got {text!r}")
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antonov",
        description="Steady states, Antonov spectra, scattering and Landau damping in plane symmetry.",
    )
    parser.add_argument("--version", action="version", version=get_version_string())
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (env LOG_LEVEL)")
    parser.add_argument("--json-logs", action="store_true", default=None, help="JSON lines on stderr")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON or YAML run configuration")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one configuration field; repeatable",
    )
    for flag, (field, kind, text) in SHORTCUTS.items():
        extra: dict[str, Any] = {}
        if field == "profile":
            extra["choices"] = PROFILES
        if field == "initial_data":
            extra["choices"] = INITIAL_DATA
        common.add_argument(flag, dest=field, type=kind, default=None, help=text, **extra)
    common.add_argument("--refine", action="store_true", default=None, help="run the doubling study")

    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "steady": "solve (or load) the steady state and write the action-angle chart",
        "bands": "band functions, segments and the no-gap condition",
        "modes": "Antonov operator, eigenvalue report and the embedded-eigenvalue scan",
        "scatter": "generalized Fourier maps, wave operators and residuals",
        "evolve": "Antonov wave evolution and damping metrics",
        "accept": "run the acceptance suite (exit 4 on breach)",
    }
    for name in USE_CASES:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    overrides: dict[str, Any] = {}
    for field, _, _ in SHORTCUTS.values():
        value = getattr(args, field, None)
        if value is not None:
            overrides[field] = value
    if args.refine:
        overrides["refine"] = True
    if "mass" in overrides and "depth" not in overrides:
        overrides["depth"] = None
    overrides.update(_parse_assignment(item) for item in args.set)
    return cfg.with_overrides(overrides) if overrides else cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(level=args.log_level, json_logs=args.json_logs)
    try:
        cfg = resolve_config(args)
        result = USE_CASES[args.command]().execute(cfg)
    except AppError as e:
        code = exit_code_for(e)
        logger.error("%s failed: %s", args.command, e, extra={"event": "command_failed"})
        print(f"error: {e}", file=sys.stderr)
        return code
    except KeyboardInterrupt:
        return 130
    payload = {
        "command": result.command,
        "run_dir": str(result.run_dir),
        "artifacts": result.artifacts,
        "summary": result.summary,
    }
    print(json.dumps(payload, indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
