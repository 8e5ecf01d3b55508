"""Command-line interface.

Subcommands: ``table``, ``sweep``, ``validate``, ``rates``, ``simulate``.

Shared settings resolve in this order: command-line flag, ``PRESSURE_MATCH_*``
environment variable, config file (``--config`` or ``PRESSURE_MATCH_CONFIG``),
built-in default. The config file holds flat ``key = value`` lines, e.g.::

    # pressure-match.cfg
    alpha = 0.15
    engine = oracle
    precision = 6

Exit codes: 0 success, 1 validation failure, 2 input error.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .calibration import MarketObservation, calibrate, key_statistics, rates_from_counts
from .errors import PressureMatchError
from .ingest import bundled_observations, load_counts, load_observations
from .model import ModelParams
from .montecarlo import simulate
from .oracle import DEFAULT_CAP, exact_conditional_match_rates, exact_type1_errors
from .report import make_row, parse_precision, render, render_table
from .sweep import PARAMETERS, sweep
from .validation import run_validation

log = logging.getLogger("pressure_match")

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2
ENV_PREFIX = "PRESSURE_MATCH_"

DEFAULTS = {
    "alpha": "0.15",
    "seed": "0",
    "trials": "1000000",
    "engine": "analytic",
    "format": "md",
    "precision": "4",
    "output": "-",
    "workers": "1",
}
ENGINE_ALIASES = {"analytic": "analytic", "oracle": "oracle", "mc": "montecarlo", "montecarlo": "montecarlo"}


class Settings:
    """Resolved shared options for one invocation."""

    def __init__(self, args: argparse.Namespace, defaults: Optional[Dict[str, str]] = None):
        self.args = args
        self.defaults = dict(DEFAULTS)
        self.defaults.update(defaults or {})
        self.file_values = self._read_config(
            getattr(args, "config", None) or os.environ.get(ENV_PREFIX + "CONFIG")
        )

    @staticmethod
    def _read_config(path) -> Dict[str, str]:
        if not path:
            return {}
        parser = configparser.ConfigParser()
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise PressureMatchError(f"cannot read config file {path}: {exc.strerror}")
        try:
            parser.read_string("[settings]\n" + text, source=str(path))
        except configparser.Error as exc:
            raise PressureMatchError(f"{path}: malformed config file: {exc}")
        return {k.lower(): v.strip() for k, v in parser["settings"].items()}

    def raw(self, name: str) -> str:
        value = getattr(self.args, name, None)
        if value is not None:
            return str(value)
        env = os.environ.get(ENV_PREFIX + name.upper())
        if env is not None and env != "":
            return env
        if name in self.file_values:
            return self.file_values[name]
        return self.defaults[name]

    def number(self, name: str, kind=float):
        text = self.raw(name)
        try:
            return kind(text)
        except ValueError:
            raise PressureMatchError(f"setting {name!r}: cannot parse {text!r} as {kind.__name__}")

    @property
    def alpha(self) -> float:
        return self.number("alpha")

    @property
    def seed(self) -> int:
        return self.number("seed", int)

    @property
    def trials(self) -> int:
        return self.number("trials", int)

    @property
    def workers(self) -> int:
        return self.number("workers", int)

    @property
    def engine(self) -> str:
        name = self.raw("engine").lower()
        if name not in ENGINE_ALIASES:
            raise PressureMatchError(f"unknown engine {name!r}; choose analytic, oracle or mc")
        return ENGINE_ALIASES[name]

    @property
    def format(self) -> str:
        fmt = self.raw("format").lower()
        if fmt not in ("md", "csv"):
            raise PressureMatchError(f"unknown format {fmt!r}; choose md or csv")
        return fmt

    @property
    def precision(self):
        try:
            return parse_precision(self.raw("precision"))
        except ValueError:
            raise PressureMatchError(f"invalid precision {self.raw('precision')!r}")

    def emit(self, text: str) -> None:
        target = self.raw("output")
        if target in ("-", ""):
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            Path(target).write_text(text, encoding="utf-8")
            log.info("wrote %s", target)


def _shared(parser: argparse.ArgumentParser, *, engine=False, trials=False) -> None:
    parser.add_argument("--alpha", help="target type-I error (default 0.15)")
    parser.add_argument("--format", choices=("md", "csv"), help="output format (default md)")
    parser.add_argument("--precision", help="decimals shown, or 'full' (default 4)")
    parser.add_argument("--output", help="output path (default stdout)")
    parser.add_argument("--config", help="flat key = value config file")
    if engine:
        parser.add_argument("--engine", help="analytic | oracle | mc (default analytic)")
    if trials:
        parser.add_argument("--trials", type=int, help="Monte Carlo trials (default 1e6)")
        parser.add_argument("--seed", type=int, help="Monte Carlo seed (default 0)")
        parser.add_argument("--workers", type=int, help="Monte Carlo worker threads (default 1)")


def _model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--market", help="take a, e, L, P1, P2 from a bundled market (e.g. 'U.S.')")
    parser.add_argument("--a", type=float, help="acceptance probability")
    parser.add_argument("--e", type=float, help="pressure probability given acceptance")
    parser.add_argument("--L", type=int, help="list length")
    parser.add_argument("--epsilon", type=float, help="swap probability")
    parser.add_argument("--P1", type=float, help="first-rank conditional match rate")
    parser.add_argument("--P2", type=float, help="later-rank conditional match rate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pressure-match",
        description="First-rank pressure in residency matching: statistics, calibration and checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("table", parents=[common], help="headline statistics for each market")
    p.add_argument("observations", nargs="?", help="CSV/JSON with market,P1,P2,L (default: bundled)")
    _shared(p, engine=True, trials=True)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("sweep", parents=[common], help="statistics over a one-parameter grid, as plot-ready rows")
    p.add_argument("parameter", choices=PARAMETERS)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=50)
    _model_flags(p)
    _shared(p)
    p.set_defaults(func=cmd_sweep, defaults={"format": "csv"})

    p = sub.add_parser("validate", parents=[common], help="cross-check closed forms, enumeration and simulation")
    p.add_argument("--max-L", type=int, default=6, dest="max_L")
    p.add_argument("--grid-density", type=int, default=5, help="points per axis in 0.1..0.9")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per market (default 1e5)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--output")
    p.add_argument("--config")
    p.set_defaults(func=cmd_validate, defaults={"trials": "100000"})

    p = sub.add_parser("rates", parents=[common], help="conditional match rates from aggregate counts")
    p.add_argument("counts", help="CSV/JSON counts file")
    p.add_argument("--calibrate", action="store_true", help="also recover (a, e) from the first two rates")
    p.add_argument("--L", type=int, help="list length for --calibrate")
    p.add_argument("--format", choices=("md", "csv"))
    p.add_argument("--precision")
    p.add_argument("--output")
    p.add_argument("--config")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimates with standard errors")
    _model_flags(p)
    p.add_argument("--compare", action="store_true", help="add exact values and z-scores (L within cap)")
    _shared(p, trials=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def _find_market(label: str) -> MarketObservation:
    for obs in bundled_observations():
        if obs.label.lower() == label.lower():
            return obs
    names = ", ".join(repr(o.label) for o in bundled_observations())
    raise PressureMatchError(f"unknown market {label!r}; bundled markets are {names}")


def _fixed_values(args) -> Dict[str, Optional[float]]:
    fixed: Dict[str, Optional[float]] = {}
    if args.market:
        obs = _find_market(args.market)
        a, e = calibrate(obs)
        fixed.update(a=a, e=e, L=obs.L, P1=obs.P1, P2=obs.P2)
    for key in ("a", "e", "L", "epsilon", "P1", "P2"):
        value = getattr(args, key)
        if value is not None:
            fixed[key] = value
    return fixed


def cmd_table(args, settings: Settings) -> int:
    observations = load_observations(args.observations) if args.observations else bundled_observations()
    if not observations:
        log.warning("no observations in %s; emitting an empty table", args.observations)
    engine, alpha = settings.engine, settings.alpha
    rows = []
    started = time.perf_counter()
    for obs in observations:
        stats = key_statistics(
            obs, alpha, engine=engine, trials=settings.trials, seed=settings.seed, workers=settings.workers
        )
        if not stats.feasible:
            log.warning("%s: alpha=%g exceeds a/2=%.4f, PRL marked infeasible", obs.label, alpha, stats.a / 2)
        rows.append(make_row(obs, alpha, stats, engine))
    log.info("computed %d rows with the %s engine in %.3fs", len(rows), engine, time.perf_counter() - started)
    settings.emit(render_table(rows, settings.format, settings.precision))
    return EXIT_OK


def cmd_sweep(args, settings: Settings) -> int:
    fixed = _fixed_values(args)
    fixed["alpha"] = settings.alpha
    columns, rows = sweep(args.parameter, args.start, args.stop, args.steps, fixed)
    settings.emit(render(columns, rows, settings.format, settings.precision, verbatim=(args.parameter,)))
    return EXIT_OK


def cmd_validate(args, settings: Settings) -> int:
    if args.max_L > DEFAULT_CAP:
        raise PressureMatchError(f"--max-L {args.max_L} exceeds the enumeration cap of {DEFAULT_CAP}")
    report = run_validation(
        max_L=args.max_L,
        grid_density=args.grid_density,
        trials=settings.trials,
        seed=settings.seed,
        workers=settings.workers,
    )
    settings.emit(report.summary())
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_rates(args, settings: Settings) -> int:
    if args.calibrate and args.L is None:
        raise PressureMatchError("--calibrate needs --L")
    rows = []
    for counts in load_counts(args.counts):
        table = rates_from_counts(counts)
        calibrated = {}
        if args.calibrate:
            if len(table.rates) < 2:
                raise PressureMatchError(f"{counts.market}: calibration needs rates for ranks 1 and 2")
            a, e = calibrate(MarketObservation(table.rates[0], table.rates[1], args.L, counts.market))
            calibrated = {"L": args.L, "a": a, "e": e}
        for k, rate in enumerate(table.rates, 1):
            rows.append({"market": counts.market, "rank": k, "rate": rate, "formula": table.formula, **calibrated})
    columns = ["market", "rank", "rate", "formula"] + (["L", "a", "e"] if args.calibrate else [])
    settings.emit(render(columns, rows, settings.format, settings.precision))
    return EXIT_OK


def cmd_simulate(args, settings: Settings) -> int:
    fixed = _fixed_values(args)
    missing = [k for k in ("a", "e", "L") if fixed.get(k) is None]
    if missing:
        raise PressureMatchError(f"simulate needs {', '.join('--' + m for m in missing)} or --market")
    params = ModelParams(int(fixed["L"]), fixed["a"], fixed["e"], fixed.get("epsilon") or 0.0)
    result = simulate(params, settings.trials, seed=settings.seed, workers=settings.workers)
    exact = {}
    if args.compare:
        if params.L > DEFAULT_CAP:
            raise PressureMatchError(f"--compare needs L <= {DEFAULT_CAP}")
        from .validation import EXACT

        rates = exact_conditional_match_rates(params)
        plain = exact_type1_errors(params.replace(epsilon=0.0))
        swapped = exact_type1_errors(params)
        exact.update({f"P{k}": v for k, v in enumerate(rates, 1)})
        exact.update({f"Q{k}": v for k, v in enumerate(plain, 1)})
        exact.update({f"Q{k}_swap": v for k, v in enumerate(swapped, 1)})
        for name in ("RL", "RL_rand", "PRL"):
            exact[name] = EXACT[name](params)
    rows = []
    for name, est in result.summary().items():
        row = {
            "statistic": name,
            "mean": est.mean,
            "std_error": est.std_error,
            "n": est.trials,
            "low_confidence": est.low_confidence,
        }
        if exact:
            row["exact"] = exact[name]
            row["z"] = est.z_score(exact[name])
        rows.append(row)
    columns = ["statistic", "mean", "std_error", "n", "low_confidence"] + (["exact", "z"] if exact else [])
    settings.emit(render(columns, rows, settings.format, settings.precision))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        settings = Settings(args, getattr(args, "defaults", None))
        return args.func(args, settings)
    except PressureMatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
