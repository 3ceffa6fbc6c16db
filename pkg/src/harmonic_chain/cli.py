"""Command-line entry point.

Subcommands: ``simulate``, ``sample``, ``covariance-table``, ``kernel-table``
and ``scenario NAME``.  Exit status: 0 all checks pass, 1 a check failed,
2 usage error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys

import numpy as np

from . import scenarios
from .errors import AccuracyError, ConfigError, NumericalError
from .report import ScenarioReport
from .sampler import build_sampler, sample_stationary
from .sde import (AbsorbingLayer, EnergyObserver, SimConfig, WindowCovarianceObserver,
                  simulate)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


def _global_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="random seed")
    g.add_argument("--out", default=None, help="write output here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--threads", type=int, default=1, help="worker threads for ensembles")
    g.add_argument("--config", default=None,
                   help="INI file; section [NAME] holds key = value settings")
    g.add_argument("--describe", action="store_true",
                   help="print what the command checks and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmonic-chain",
        description="Stochastically forced chain of coupled oscillators.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a trajectory ensemble")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=0.5)
    p.add_argument("--t-final", type=float, default=10.0)
    p.add_argument("--trajectories", type=int, default=100)
    p.add_argument("--integrator", choices=("exact", "euler"), default="exact")
    p.add_argument("--absorb", default=None, metavar="L:NU_ABS")
    p.add_argument("--initial", choices=("zero", "stationary"), default="zero")
    p.add_argument("--sites", default="1,2", help="sites whose covariance is tracked")
    _global_flags(p)

    p = sub.add_parser("sample", help="draw from the stationary law")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--count", type=int, default=10)
    _global_flags(p)

    p = sub.add_parser("covariance-table", help="stationary covariances c(m, n)")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--nu", type=float, default=0.0)
    _global_flags(p)

    p = sub.add_parser("kernel-table", help="kernel values G_n(s)")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--s-max", type=float, default=10.0)
    p.add_argument("--ds", type=float, default=0.5)
    p.add_argument("--nu", type=float, default=0.0)
    _global_flags(p)

    p = sub.add_parser("scenario", help="run a named experiment")
    p.add_argument("name", choices=sorted(scenarios.DEFAULTS))
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a scenario parameter")
    _global_flags(p)
    return parser


def _read_config(path, section):
    if path is None:
        return {}
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path!r}")
    return dict(cp[section]) if cp.has_section(section) else {}


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(report: ScenarioReport, fmt: str, table: str | None = None) -> str:
    if fmt == "json":
        return report.to_json() + "\n"
    if table is not None:
        return report.table_csv(table)
    return report.to_csv()


def _cmd_scenario(args) -> ScenarioReport:
    params = _read_config(args.config, args.name)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()
    if args.seed is not None and "seed" in scenarios.DEFAULTS[args.name]:
        params["seed"] = args.seed
    return scenarios.run_scenario(args.name, params, threads=args.threads)


def _cmd_simulate(args) -> ScenarioReport:
    layer = AbsorbingLayer.parse(args.absorb) if args.absorb else None
    cfg = SimConfig(N=args.n, nu=args.nu, dt=args.dt, T=args.t_final,
                    trajectories=args.trajectories, seed=args.seed or 0,
                    integrator=args.integrator, absorbing_layer=layer,
                    initial=args.initial)
    sites = scenarios.parse_list(args.sites, int)
    return simulate(cfg, [EnergyObserver(), WindowCovarianceObserver(sites)],
                    threads=args.threads)


def _cmd_sample(args) -> str:
    sampler = build_sampler(args.n, args.nu, args.seed or 0)
    draws = sample_stationary(sampler, args.count)
    if args.format == "json":
        return json.dumps({"n": args.n, "nu": args.nu, "seed": sampler.seed,
                           "draws": draws.tolist()}, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["draw"] + [f"a{k}" for k in range(1, args.n + 1)])
    for i, row in enumerate(draws):
        w.writerow([i] + [repr(float(x)) for x in row])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.describe:
        key = args.name if args.command == "scenario" else args.command
        text = scenarios.DESCRIPTIONS.get(key, parser.description)
        params = scenarios.DEFAULTS.get(key)
        print(text)
        if params:
            print("defaults: " + ", ".join(f"{k}={v}" for k, v in params.items()))
        return EXIT_OK
    try:
        if args.command == "sample":
            _emit(_cmd_sample(args), args.out)
            return EXIT_OK
        if args.command == "scenario":
            report, table = _cmd_scenario(args), None
        elif args.command == "simulate":
            report, table = _cmd_simulate(args), None
        elif args.command == "covariance-table":
            report = scenarios.run_scenario(
                "covariance-table", {"n_max": args.n_max, "nu": args.nu})
            table = "covariance"
        else:
            report = scenarios.run_scenario(
                "kernel-table", {"n_max": args.n_max, "s_max": args.s_max,
                                 "ds": args.ds, "nu": args.nu})
            table = "kernel"
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, AccuracyError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(_render(report, args.format, table), args.out)
    for c in report.checks:
        print(c.line(), file=sys.stderr)
    for note in report.notes:
        print(f"note: {note}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
