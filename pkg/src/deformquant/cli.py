"""Command-line runner for the identity, mollifier and conjecture suites.

Exit status: 0 when every gate passes, 2 on any gate failure, 64 on a usage
error (bad flags or configuration).  Outputs are deterministic for a fixed
configuration and seed; the summary file is written last.
"""
import argparse
import os
import sys

from .config import ConfigError, ExperimentConfig, build_config, load_config
from .experiments import SUITES
from .io import atomic_write, table_csv, to_json

EXIT_OK = 0
EXIT_GATE = 2
EXIT_USAGE = 64

GATE_COLUMNS = ["suite", "check", "identity", "params", "value", "gate", "passed"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(
        prog="deformquant",
        description="Run the deformation-quantization verification suites.",
        epilog="Set DEFORMQUANT_THREADS to cap the BLAS/FFT thread count.",
    )
    p.add_argument("--config", metavar="PATH", help="flat key = value configuration file")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="ensemble seed (overrides the config)")
    p.add_argument(
        "--suite", choices=["identities", "mollifier", "conjecture", "all"], default="all"
    )
    p.add_argument("--emit", choices=["csv", "json"], default="json", help="gate report format")
    return p


def _gate_report(rows, emit):
    if emit == "json":
        return to_json(rows)
    return table_csv(rows, GATE_COLUMNS)


def run(cfg, suites, emit, log=print):
    """Run ``suites`` and write their reports; returns the exit status."""
    out = cfg.out
    summary = {"config": _config_record(cfg), "suites": {}}
    failed = False
    for name in suites:
        rows, tables = SUITES[name](cfg)
        atomic_write(os.path.join(out, f"{name}.{emit}"), _gate_report(rows, emit))
        for stem, table in tables.items():
            if stem == "verdicts":
                atomic_write(os.path.join(out, f"{name}_verdicts.json"), to_json(table))
            else:
                atomic_write(os.path.join(out, f"{stem}.csv"), table_csv(table))
        bad = [r for r in rows if not r["passed"]]
        failed |= bool(bad)
        summary["suites"][name] = {"gates": len(rows), "failed": len(bad)}
        for r in rows:
            mark = "PASS" if r["passed"] else "FAIL"
            log(f"{mark} {name}/{r['check']} [{r['params']}] value={r['value']:.3e} gate={r['gate']}")
    summary["status"] = "fail" if failed else "pass"
    atomic_write(os.path.join(out, "summary.json"), to_json(summary))
    return EXIT_GATE if failed else EXIT_OK


def _config_record(cfg):
    return {
        "n": cfg.n, "N": cfg.N, "L": cfg.L, "k": list(cfg.ks), "theta": list(cfg.thetas),
        "J": cfg.J, "mollifier_N": cfg.mollifier_N, "mollifier_L": cfg.mollifier_L,
        "m_list": None if cfg.m_list is None else list(cfg.m_list), "seed": cfg.seed,
        "trials": cfg.trials, "floor": cfg.floor, "tol": cfg.tol,
    }


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config) if args.config else build_config({})
        overrides = {}
        if args.out is not None:
            overrides["out"] = args.out
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = cfg.with_overrides(**overrides) if overrides else cfg
    except (UsageError, ConfigError) as exc:
        print(f"deformquant: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    return run(cfg, suites, args.emit)


__all__ = ["main", "run", "ExperimentConfig", "EXIT_OK", "EXIT_GATE", "EXIT_USAGE"]
