"""Command-line entry points and structured text output.

Everything is written as plain comma-separated text with fixed headers
(profiles, time series, bisection log) plus a flat key=value manifest, so
any plotting tool can consume the results.  Numeric fields are printed
with 17 significant digits and round-trip exactly through float().
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, NamedTuple

import numpy as np

from .classify import OutcomeKind, RunOutcome, pinch_diagnostics
from .critsearch import BisectionResult, BracketError, bisect
from .flow import FlowConfig, evolve
from .geometry import (CurvatureProfile, FieldState, corseted_initial_data,
                       ricci_eigenvalues, sphere_areas, volume_normalizer,
                       average_scalar_curvature)
from .grid import Grid, build_grid

__all__ = [
    "CliError",
    "parse_config",
    "emit_profile",
    "emit_timeseries",
    "TimeseriesWriter",
    "TimeseriesRecord",
    "write_manifest",
    "read_manifest",
    "run_cli",
    "main",
]

PROFILE_HEADER = "t,psi,X,S,W,R_s2,R_perp,area"
TIMESERIES_HEADER = "t,max_R_s2,argmax_psi_R_s2,max_R_perp,r_hat,volume,min_area"
BISECT_LOG_HEADER = "iter,lambda,outcome,t_final"


class CliError(Exception):
    """Bad arguments or config input; maps to exit status 2."""


def _fmt(v: float) -> str:
    return f"{v:.17g}"


# user-facing key <-> FlowConfig field, with the parser for each value
_INT_KEYS = {"n-points": "n_total", "snapshot-every": "snapshot_every"}
_FLOAT_KEYS = {
    "lambda": "lam",
    "dt-safety": "dt_safety",
    "fixed-dt": "fixed_dt",
    "t-max": "t_max",
    "blowup-threshold": "curvature_blowup",
    "round-tol": "round_tol",
}
# accepted in config files but consumed by the driver, not FlowConfig
_EXTRA_KEYS = ("lo", "hi", "width-tol", "out")
_KNOWN_KEYS = tuple(_INT_KEYS) + tuple(_FLOAT_KEYS) + _EXTRA_KEYS


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat key=value config file with # comments."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise CliError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _convert(key: str, text: str):
    try:
        if key in _INT_KEYS:
            return int(text)
        return float(text)
    except ValueError:
        raise CliError(f"invalid numeric value for {key}: {text!r}") from None


def build_flow_config(values: dict[str, object]) -> FlowConfig:
    """Build a FlowConfig from user-facing keys, naming offenders on error."""
    kwargs = {}
    for key, value in values.items():
        if key in _EXTRA_KEYS:
            continue
        if key in _INT_KEYS:
            kwargs[_INT_KEYS[key]] = value
        elif key in _FLOAT_KEYS:
            kwargs[_FLOAT_KEYS[key]] = value
        else:
            raise CliError(f"unknown key {key!r}")
    if "lam" not in kwargs:
        raise CliError("missing required key: lambda")
    field_to_key = {v: k for k, v in (_INT_KEYS | _FLOAT_KEYS).items()}
    try:
        return FlowConfig(**kwargs)
    except ValueError as exc:
        msg = str(exc)
        for fieldname, key in field_to_key.items():
            if fieldname in msg:
                raise CliError(msg.replace(fieldname, key)) from None
        raise CliError(msg) from None


def _merge_values(flags: dict[str, object],
                  config_file: str | Path | None) -> dict[str, object]:
    """File values first, flags override; values already converted."""
    merged: dict[str, object] = {}
    if config_file is not None:
        for key, text in read_config_file(config_file).items():
            merged[key] = text if key == "out" else _convert(key, text)
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    return merged


def parse_config(args: Iterable[str],
                 config_file: str | Path | None = None) -> FlowConfig:
    """Parse flag tokens (plus an optional config file) into a FlowConfig.

    Flags override file values; unspecified fields take the documented
    defaults (n-points=402, dt-safety=0.5, t-max=50, blowup-threshold=1e6,
    round-tol=1e-3, snapshot-every=100, adaptive dt).
    """
    parser = argparse.ArgumentParser(add_help=False, exit_on_error=False)
    _add_flow_flags(parser)
    parser.add_argument("--config", default=None)
    try:
        ns, leftovers = parser.parse_known_args(list(args))
    except argparse.ArgumentError as exc:
        raise CliError(str(exc)) from None
    if leftovers:
        raise CliError(f"unknown argument {leftovers[0]!r}")
    if ns.config is not None:
        config_file = ns.config
    return build_flow_config(_merge_values(_flag_values(ns), config_file))


def _add_flow_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="corseting parameter of the initial data")
    parser.add_argument("--n-points", type=int, default=None,
                        help="grid points including the two ghosts (default 402)")
    parser.add_argument("--dt-safety", type=float, default=None,
                        help="fraction of the diffusive stability limit (default 0.5)")
    parser.add_argument("--fixed-dt", type=float, default=None,
                        help="fixed time step overriding the adaptive one")
    parser.add_argument("--t-max", type=float, default=None,
                        help="flow-time horizon (default 50)")
    parser.add_argument("--blowup-threshold", type=float, default=None,
                        help="supercritical threshold on max R_s2 (default 1e6)")
    parser.add_argument("--round-tol", type=float, default=None,
                        help="subcritical tolerance (default 1e-3)")
    parser.add_argument("--snapshot-every", type=int, default=None,
                        help="steps between profile dumps (default 100)")


def _flag_values(ns: argparse.Namespace) -> dict[str, object]:
    return {
        "lambda": ns.lam,
        "n-points": ns.n_points,
        "dt-safety": ns.dt_safety,
        "fixed-dt": ns.fixed_dt,
        "t-max": ns.t_max,
        "blowup-threshold": ns.blowup_threshold,
        "round-tol": ns.round_tol,
        "snapshot-every": ns.snapshot_every,
    }


def emit_profile(state: FieldState, profile: CurvatureProfile, grid: Grid,
                 destination: str | Path | IO[str]) -> None:
    """Write one profile table, one row per interior point by increasing psi."""
    areas = sphere_areas(state, grid)
    I = grid.interior
    w = state.s[I] * grid.sin_sq[I]
    columns = (grid.psi_interior, state.x[I], state.s[I], w,
               profile.r_s2[I], profile.r_perp[I], areas)
    lines = [PROFILE_HEADER]
    for row in zip(*columns):
        lines.append(",".join([_fmt(state.t)] + [_fmt(v) for v in row]))
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)


class TimeseriesRecord(NamedTuple):
    t: float
    max_r_s2: float
    argmax_psi_r_s2: float
    max_r_perp: float
    r_hat: float
    volume: float
    min_area: float


def timeseries_record(state: FieldState, profile: CurvatureProfile,
                      r_hat: float, grid: Grid) -> TimeseriesRecord:
    d = pinch_diagnostics(profile, state, grid)
    return TimeseriesRecord(t=state.t, max_r_s2=d.max_r_s2,
                            argmax_psi_r_s2=d.argmax_psi,
                            max_r_perp=d.max_r_perp, r_hat=r_hat,
                            volume=volume_normalizer(state, grid),
                            min_area=d.min_area)


class TimeseriesWriter:
    """Append-only time-series table, flushed per record so interrupted
    runs keep their history."""

    def __init__(self, destination: str | Path):
        self._fh = open(destination, "w")
        self._fh.write(TIMESERIES_HEADER + "\n")
        self._fh.flush()

    def write(self, record: TimeseriesRecord) -> None:
        self._fh.write(",".join(_fmt(v) for v in record) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TimeseriesWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def emit_timeseries(records: Iterable[TimeseriesRecord],
                    destination: str | Path) -> None:
    """Write a whole record stream to one table."""
    with TimeseriesWriter(destination) as writer:
        for record in records:
            writer.write(record)


def write_manifest(entries: dict[str, str], destination: str | Path) -> None:
    lines = [f"{key}={value}" for key, value in entries.items()]
    Path(destination).write_text("\n".join(lines) + "\n")


def read_manifest(source: str | Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    for raw in Path(source).read_text().splitlines():
        if not raw.strip():
            continue
        key, _, value = raw.partition("=")
        entries[key] = value
    return entries


def _config_entries(config: FlowConfig) -> dict[str, str]:
    entries = {
        "lambda": _fmt(config.lam),
        "n-points": str(config.n_total),
        "dt-safety": _fmt(config.dt_safety),
        "t-max": _fmt(config.t_max),
        "blowup-threshold": _fmt(config.curvature_blowup),
        "round-tol": _fmt(config.round_tol),
        "snapshot-every": str(config.snapshot_every),
        "dt-policy": "fixed" if config.fixed_dt is not None else "adaptive",
    }
    if config.fixed_dt is not None:
        entries["fixed-dt"] = _fmt(config.fixed_dt)
    return entries


@dataclass
class _RunPaths:
    out_dir: Path

    def profile(self, step: int) -> Path:
        return self.out_dir / f"profile_{step:08d}.csv"

    @property
    def timeseries(self) -> Path:
        return self.out_dir / "timeseries.csv"

    @property
    def manifest(self) -> Path:
        return self.out_dir / "manifest"

    @property
    def bisect_log(self) -> Path:
        return self.out_dir / "bisect_log.csv"


def _cmd_evolve(config: FlowConfig, out_dir: Path) -> int:
    grid = build_grid(config.n_total)
    paths = _RunPaths(out_dir)
    files: list[str] = []
    snapshot_step = 0

    with TimeseriesWriter(paths.timeseries) as series:
        files.append(paths.timeseries.name)

        def observer(state: FieldState, profile: CurvatureProfile,
                     r_hat: float) -> None:
            nonlocal snapshot_step
            series.write(timeseries_record(state, profile, r_hat, grid))
            dest = paths.profile(snapshot_step)
            emit_profile(state, profile, grid, dest)
            files.append(dest.name)
            snapshot_step += config.snapshot_every

        outcome = evolve(config, observer)
        last_written = snapshot_step - config.snapshot_every
        if outcome.steps > 0 and outcome.steps != last_written:
            series.write(timeseries_record(outcome.final_state,
                                           outcome.final_profile,
                                           outcome.r_hat, grid))
            dest = paths.profile(outcome.steps)
            emit_profile(outcome.final_state, outcome.final_profile, grid, dest)
            files.append(dest.name)

    entries = {"command": "evolve"}
    entries.update(_config_entries(config))
    entries.update({
        "outcome": outcome.kind.value,
        "t-final": _fmt(outcome.t_final),
        "steps": str(outcome.steps),
        "files": ",".join(files),
    })
    write_manifest(entries, paths.manifest)
    return 1 if outcome.kind is OutcomeKind.FAILURE else 0


def _cmd_bisect(config: FlowConfig, out_dir: Path, lo: float, hi: float,
                width_tol: float) -> int:
    paths = _RunPaths(out_dir)
    result = bisect(lo, hi, config, width_tol)
    lines = [BISECT_LOG_HEADER]
    for i, it in enumerate(result.iterations):
        lines.append(f"{i},{_fmt(it.lam)},{it.kind.value},{_fmt(it.t_final)}")
    paths.bisect_log.write_text("\n".join(lines) + "\n")

    entries = {"command": "bisect"}
    entries.update(_config_entries(config))
    entries.update({
        "lo": _fmt(lo),
        "hi": _fmt(hi),
        "width-tol": _fmt(width_tol),
        "bracket-lo": _fmt(result.lambda_lo),
        "bracket-hi": _fmt(result.lambda_hi),
        "bracket-width": _fmt(result.bracket_width),
        "lambda-crit-estimate": _fmt(result.lambda_crit_estimate),
        "iterations": str(len(result.iterations)),
        "halted-on": (result.halted_on.kind.value
                      if result.halted_on is not None else "none"),
        "files": paths.bisect_log.name,
    })
    write_manifest(entries, paths.manifest)
    return 0


def _cmd_initial_data(config: FlowConfig, out_dir: Path) -> int:
    grid = build_grid(config.n_total)
    state = corseted_initial_data(config.lam, grid)
    profile = ricci_eigenvalues(state, grid)
    emit_profile(state, profile, grid, _RunPaths(out_dir).profile(0))
    return 0


def run_cli(argv: list[str]) -> int:
    """Entry point; returns the process exit status."""
    parser = argparse.ArgumentParser(
        prog="neckpinch",
        description="Volume-normalized DeTurck flow of corseted three-sphere "
                    "metrics: evolution, neck-pinch classification, and "
                    "critical-threshold search.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("evolve", "bisect", "initial-data"):
        p = sub.add_parser(name)
        _add_flow_flags(p)
        p.add_argument("--config", default=None,
                       help="flat key=value config file; flags override it")
        p.add_argument("--out", default=None, help="output directory")
        if name == "bisect":
            p.add_argument("--lo", type=float, default=None,
                           help="supercritical bracket end (default 0.11)")
            p.add_argument("--hi", type=float, default=None,
                           help="subcritical bracket end (default 0.2)")
            p.add_argument("--width-tol", type=float, default=None,
                           help="terminal bracket width (default 5e-4)")

    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        flags = _flag_values(ns)
        if ns.command == "bisect":
            flags["lo"] = ns.lo
            flags["hi"] = ns.hi
            flags["width-tol"] = ns.width_tol
        if ns.out is not None:
            flags["out"] = ns.out
        values = _merge_values(flags, ns.config)
        lo = float(values.pop("lo", 0.11))
        hi = float(values.pop("hi", 0.2))
        width_tol = float(values.pop("width-tol", 5e-4))
        out_dir = Path(str(values.pop("out", ".")))
        if ns.command == "bisect" and "lambda" not in values:
            values["lambda"] = lo  # evolve() varies lam; seed must be valid
        config = build_flow_config(values)
    except CliError as exc:
        print(f"neckpinch: error: {exc}", file=sys.stderr)
        return 2

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if ns.command == "evolve":
            return _cmd_evolve(config, out_dir)
        if ns.command == "bisect":
            return _cmd_bisect(config, out_dir, lo, hi, width_tol)
        return _cmd_initial_data(config, out_dir)
    except BracketError as exc:
        print(f"neckpinch: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        target = getattr(exc, "filename", None) or out_dir
        print(f"neckpinch: error: cannot write {target}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
