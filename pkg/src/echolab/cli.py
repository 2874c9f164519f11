"""``echolab`` command line.

Exit codes: 0 success, 1 usage or config error, 2 regime check failed under
``--strict``, 3 crosscheck tolerance exceeded, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config, parse_overrides
from .model import ParameterError, derive, validate_regime
from .plotting import PlotError, emit_plot_script
from .presets import PRESETS, run_preset
from .sweep import Engine, RegimeError, SweepError, regime_warnings, run_sweep, spec_from_config

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REGIME = 2
EXIT_CROSSCHECK = 3
EXIT_NUMERICAL = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="echolab", description="Qubit echo signals with a damped mechanical resonator.")
    p.add_argument("--version", action="version", version=f"echolab {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("sweep", help="run the sweep described by a config file")
    s.add_argument("config")
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.add_argument("--strict", action="store_true", help="abort if a regime check fails")

    s = sub.add_parser("preset", help="reproduce a figure layout")
    s.add_argument("name", choices=PRESETS)
    s.add_argument("--engine", default="analytic", choices=[e.value for e in Engine])
    s.add_argument("--tol", type=float, help="tolerance for --engine=crosscheck")
    s.add_argument("--out-dir", default=".", help="directory for CSV (and plot) files")
    s.add_argument("--plot", action="store_true", help="also write a gnuplot script")
    s.add_argument("--strict", action="store_true")

    s = sub.add_parser("crosscheck", help="compare the analytic signal with both oracles")
    s.add_argument("config")
    s.add_argument("--tol", type=float, required=True)
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.add_argument("--strict", action="store_true")

    s = sub.add_parser("validate", help="report the dispersive-regime checks")
    s.add_argument("config")
    s.add_argument("--strict", action="store_true", help="exit 2 if any check fails")
    return p


def _split_overrides(argv):
    """Pull ``--section.key=value`` overrides out of ``argv``."""
    rest, overrides = [], []
    for arg in argv:
        head = arg[2:].split("=", 1)[0] if arg.startswith("--") else ""
        if "." in head and "=" in arg:
            overrides.append(arg)
        else:
            rest.append(arg)
    return rest, parse_overrides(overrides)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _warn(lines) -> None:
    for line in lines:
        print(f"warning: {line}", file=sys.stderr)


def _cmd_sweep(args, overrides) -> int:
    spec = spec_from_config(load_config(args.config, overrides))
    result = run_sweep(spec, strict=args.strict)
    _warn(result.warnings)
    _emit(result.to_csv(), args.out)
    return EXIT_OK


def _cmd_crosscheck(args, overrides) -> int:
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    spec = spec_from_config(load_config(args.config, overrides))
    spec = replace(spec, engine=Engine.CROSSCHECK, tol=args.tol)
    result = run_sweep(spec, strict=args.strict)
    _warn(result.warnings)
    _emit(result.to_csv(), args.out)
    ok = result.max_discrepancy <= args.tol
    verdict = "ok" if ok else "EXCEEDED"
    print(
        f"crosscheck: max |delta Tr rho_+-| = {result.max_discrepancy:.3e} "
        f"(tol {args.tol:.3e}) {verdict}",
        file=sys.stderr,
    )
    return EXIT_OK if ok else EXIT_CROSSCHECK


def _cmd_preset(args, overrides) -> int:
    if overrides:
        raise UsageError("presets take no --section.key overrides")
    if args.engine == Engine.CROSSCHECK.value and args.tol is None:
        raise UsageError("--engine=crosscheck needs --tol")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = run_preset(args.name, args.engine, args.tol, strict=args.strict)
    paths = []
    worst = 0.0
    for stem, result in results.items():
        _warn(result.warnings)
        path = out_dir / f"{stem}.csv"
        path.write_text(result.to_csv(), encoding="utf-8")
        paths.append(path)
        worst = max(worst, result.max_discrepancy)
        print(path)
    if args.plot:
        print(emit_plot_script(paths, args.name))
    if args.engine == Engine.CROSSCHECK.value and worst > args.tol:
        print(f"crosscheck: max discrepancy {worst:.3e} exceeds {args.tol:.3e}", file=sys.stderr)
        return EXIT_CROSSCHECK
    return EXIT_OK


def _cmd_validate(args, overrides) -> int:
    cfg = load_config(args.config, overrides)
    spec = spec_from_config(cfg)
    report = validate_regime(spec.base)
    print(report.format())
    if spec.base.coupling_kappa > 0:
        d = derive(spec.base)
        print(f"omega1 = {d.omega1_rad:.6g} rad/s, gamma = {d.gamma_rad:.6g} rad/s, "
              f"delta = {d.delta_validity:.6g}, beta = {d.beta:.6g}, M = {d.big_m:.6g}")
    grid = regime_warnings(spec) if spec.axes else []
    _warn(grid)
    failed = not report.ok or bool(grid)
    return EXIT_REGIME if (failed and args.strict) else EXIT_OK


_COMMANDS = {
    "sweep": _cmd_sweep,
    "preset": _cmd_preset,
    "crosscheck": _cmd_crosscheck,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        rest, overrides = _split_overrides(argv)
        args = _parser().parse_args(rest)
        if args.command is None:
            raise UsageError("a subcommand is required (sweep, preset, crosscheck, validate)")
        return _COMMANDS[args.command](args, overrides)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegimeError as exc:
        print(f"regime check failed:\n{exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ConfigError, ParameterError, PlotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SweepError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
