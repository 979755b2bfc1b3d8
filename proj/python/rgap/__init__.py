"""Python bindings for the rgap spectral gap library."""

import json

from ._rgap import (
    EXIT_BOUND_VIOLATION,
    EXIT_CONFIG,
    EXIT_GAP_VIOLATION,
    EXIT_NUMERICAL,
    EXIT_PASS,
    ConfigError,
    MixtureConfig,
    NumericalError,
    ParameterError,
    __version__,
    default_scenario_text,
    incomplete_gamma_lower,
    incomplete_gamma_upper,
    parse_grid,
    run_cli,
    scenario_hash,
    solve_gap,
    solve_mass_action,
)


class CommandError(RuntimeError):
    def __init__(self, code, stderr):
        super().__init__(f"rgap exited with {code}: {stderr.strip()}")
        self.code = code
        self.stderr = stderr


def gap_report(*args):
    """Runs `rgap gap` with extra CLI arguments and returns the parsed report."""
    code, out, err = run_cli(["gap", *map(str, args)])
    if code != EXIT_PASS:
        raise CommandError(code, err)
    return json.loads(out)


def jsonl(command, *args):
    """Runs a JSONL-producing subcommand; returns (exit_code, rows)."""
    code, out, err = run_cli([command, *map(str, args)])
    if code == EXIT_CONFIG:
        raise CommandError(code, err)
    return code, [json.loads(line) for line in out.splitlines() if line.startswith("{")]


__all__ = [name for name in dir() if not name.startswith("_")]
