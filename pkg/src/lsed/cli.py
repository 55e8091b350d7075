"""Command-line interface: ``lsed <experiment> [options]`` and ``lsed report``.

Exit codes: 0 all checks passed, 1 a check failed its tolerance,
2 configuration or usage error, 3 numerical failure.
"""

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .balance import equilibrium_spectrum
from .config import EXPERIMENTS, SCHEMA_VERSION, defaults, dump, load_config
from .errors import ConfigurationError, LSEDError, SchemaError
from .field import PhysicalConstants
from .io import read_json, write_csv, write_json

__all__ = ["main", "build_parser", "report"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("lsed")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(f"{self.prog}: {message}")


def build_parser():
    p = _Parser(prog="lsed", description="Stochastic-electrodynamics numerical experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--config", type=Path, help="YAML file overriding the defaults")
        s.add_argument("--seed", type=int, help="override every seed in the configuration")
        s.add_argument("--out", type=Path, default=Path("out") / name)
        s.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        s.add_argument("--print-config", action="store_true",
                       help="print the resolved configuration and exit")
    r = sub.add_parser("report", help="merge summaries from experiment runs")
    r.add_argument("artifacts", nargs="+", type=Path,
                   help="run directories or summary.json files")
    r.add_argument("--out", type=Path, default=Path("out") / "report")
    return p


def _with_seed(cfg, seed):
    found = []

    def walk(node):
        for k, v in node.items():
            if isinstance(v, dict):
                walk(v)
            elif k == "seed":
                node[k] = seed
                found.append(k)
    walk(cfg)
    if not found:
        log.info("--seed ignored: %s is deterministic", cfg["experiment"])
    return cfg


def _resolve(args):
    if args.config is not None:
        cfg = load_config(args.config, args.command)
    else:
        cfg = defaults(args.command)
    if args.seed is not None:
        cfg = _with_seed(cfg, args.seed)
    if args.workers < 1:
        raise ConfigurationError("--workers must be at least 1")
    return cfg


def _summary_path(p):
    p = Path(p)
    return p / "summary.json" if p.is_dir() else p


def report(artifacts, out):
    """Merge run summaries into ``report.json``/``report.csv`` plus a figure.

    Raises
    ------
    SchemaError
        A summary is missing, unreadable, or written with another schema version.
    """
    out = Path(out)
    summaries = []
    for a in artifacts:
        path = _summary_path(a)
        try:
            s = read_json(path)
        except (OSError, ValueError) as exc:
            raise SchemaError(f"{path}: cannot read summary: {exc}") from exc
        version = s.get("schema_version") if isinstance(s, dict) else None
        if version != SCHEMA_VERSION:
            raise SchemaError(f"{path}: schema_version {version!r}, expected {SCHEMA_VERSION}")
        summaries.append((path, s))
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for path, s in summaries:
        for c in s["checks"]:
            rows.append({"run": str(path.parent), "experiment": s["experiment"],
                         "check": c["name"], "value": c["value"],
                         "tolerance": c["tolerance"], "passed": c["passed"]})
    write_csv(out / "report.csv", rows=rows)

    planck_rows = []
    for path, s in summaries:
        table = path.parent / "planck.csv"
        if s["experiment"] != "planck" or not table.exists():
            continue
        k = PhysicalConstants(**{key: s["config"]["constants"][key]
                                 for key in ("hbar", "c", "m", "e_charge")})
        with open(table, newline="", encoding="utf-8") as fh:
            for r in csv.DictReader(fh):
                beta, w = float(r["beta"]), float(r["omega"])
                x = beta * k.hbar * w
                rho0 = k.hbar * w**3 / (2 * np.pi**2 * k.c**3)
                planck_rows.append({"beta": beta, "omega": w,
                                    "rho_over_rho0": equilibrium_spectrum(w, beta, k) / rho0,
                                    "coth": 1.0 / np.tanh(0.5 * x), "cosh": np.cosh(0.5 * x)})
    if planck_rows:
        write_csv(out / "planck_table.csv", rows=planck_rows)

    merged = {
        "schema_version": SCHEMA_VERSION,
        "passed": all(s["passed"] for _, s in summaries),
        "runs": [s for _, s in summaries],
    }
    write_json(out / "report.json", merged)
    names = [f"{s['experiment']}:{c['name']}" for _, s in summaries for c in s["checks"]]
    passed = [c["passed"] for _, s in summaries for c in s["checks"]]
    plotting.report(out / "report.png", names, passed)
    return merged


def _print_checks(summary):
    for c in summary["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        print(f"{mark}  {summary['experiment']}: {c['name']} = {c['value']!r} "
              f"(tolerance {c['tolerance']!r})")


def main(argv=None):
    """Entry point; returns the process exit code."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.verbose:
        log.setLevel(logging.INFO)
    try:
        if args.command == "report":
            merged = report(args.artifacts, args.out)
            for s in merged["runs"]:
                _print_checks(s)
            return EXIT_OK if merged["passed"] else EXIT_FAIL
        cfg = _resolve(args)
        if args.print_config:
            sys.stdout.write(dump(cfg))
            return EXIT_OK
        from .experiments import run_experiment
        summary = run_experiment(cfg, args.out, args.workers)
    except (ConfigurationError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LSEDError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _print_checks(summary)
    print(f"wrote {args.out}")
    return EXIT_OK if summary["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
