"""Command-line entry point: ``rfm bench|sweep|list-problems|selftest``."""
from __future__ import annotations

import argparse
import dataclasses
import sys
import time

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bench
from .errors import ConfigError, UnknownProblem
from .problems import PROBLEM_NAMES, make_problem

CONFIG_KEYS = {f.name for f in dataclasses.fields(bench.ExperimentConfig)}
EXIT_OK, EXIT_ROW_FAILED, EXIT_CONFIG = 0, 1, 2
PAPER_SCALE_BUDGET_S = 3600.0


def parse_value(text: str):
    """TOML scalar/array if it parses as one, else the raw string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(entry: dict, assignment: str):
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = entry
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override inside non-table key {p!r}")
    node[parts[-1]] = parse_value(text.strip())


def load_entries(path):
    """Experiment dicts from a TOML file.

    Top-level keys describe one experiment; an ``experiments`` array of tables
    gives several, each inheriting the top-level keys.
    """
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    items = doc.pop("experiments", None)
    if items is None:
        return [doc]
    out = []
    for item in items:
        merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in doc.items()}
        for k, v in item.items():
            if isinstance(v, dict) and isinstance(merged.get(k), dict):
                merged[k] = {**merged[k], **v}
            else:
                merged[k] = v
        out.append(merged)
    return out


def to_config(entry: dict) -> bench.ExperimentConfig:
    unknown = set(entry) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "problem" not in entry:
        raise ConfigError("config needs a 'problem'")
    cfg = bench.ExperimentConfig(**entry)
    cfg.resolve()
    return cfg


def _entries(args):
    entries = load_entries(args.config) if args.config else [{}]
    for e in entries:
        for flag in ("problem", "J", "solver", "seed"):
            v = getattr(args, flag, None)
            if v is not None:
                e[flag] = v
        for ov in args.override or []:
            apply_override(e, ov)
    return entries


def _emit(header, rows, out):
    if out is None:
        import csv
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(rows)


def cmd_run(args, compare=None):
    if args.paper_scale:
        return cmd_paper_scale(args)
    if not args.config and not args.problem:
        raise ConfigError("need --config or --problem")
    configs = [to_config(e) for e in _entries(args)]
    out = args.out or (configs[0].output if configs else None)
    header, rows, _ = bench.run_sweep(configs, compare=compare, out=out,
                                      plot_data=args.emit_plot_data)
    _emit(header, rows, out)
    return EXIT_ROW_FAILED if any(bench.row_failed(r, header) for r in rows) else EXIT_OK


def cmd_sweep(args):
    compare = None
    if args.compare:
        compare = tuple(s.strip() for s in args.compare.split(","))
        if len(compare) != 2 or any(s not in bench.SOLVERS for s in compare):
            raise ConfigError(f"--compare needs two solvers from {', '.join(bench.SOLVERS)}")
    return cmd_run(args, compare)


def cmd_paper_scale(args):
    names = [args.problem] if args.problem else None
    if names and names[0] not in bench.PAPER_SCALE_ROWS:
        raise ConfigError(f"no Q=20^3, J=400 target for {names[0]!r}")
    start = time.perf_counter()
    header = bench.csv_header(2) + ["target_l2", "within_10x"]
    rows, failed = [], False
    for cfg in bench.paper_scale_configs(names):
        if time.perf_counter() - start > PAPER_SCALE_BUDGET_S:
            rows.append([cfg.problem, cfg.solver] + [""] * (len(header) - 3) + ["skipped:budget"])
            failed = True
            continue
        rep = bench._safe_run(cfg)
        ok = rep.status == "ok" and bench.check_paper_scale(rep)
        failed |= not ok
        row = rep.row(2)
        rows.append(row + [" ".join(map(repr, bench.PAPER_SCALE_ROWS[cfg.problem])), str(ok)])
    if args.out:
        bench.write_csv(args.out, header, rows)
    _emit(header, rows, args.out)
    return EXIT_ROW_FAILED if failed else EXIT_OK


def cmd_list(args):
    for name in PROBLEM_NAMES:
        p = make_problem(name)
        kind = "exact" if p.has_exact else "reference"
        print(f"{name}\tdim={p.dim}\tK={p.n_components}\torders={p.operator_orders}\t{kind}")
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest
    return EXIT_OK if run_selftest() else EXIT_ROW_FAILED


def build_parser():
    ap = argparse.ArgumentParser(prog="rfm", description="Random feature PDE benchmark driver")
    sub = ap.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--config", help="TOML experiment file")
        p.add_argument("--override", action="append", metavar="KEY=VAL",
                       help="override a config key (dotted keys reach into tables)")
        p.add_argument("--problem")
        p.add_argument("--J", type=int)
        p.add_argument("--solver", choices=bench.SOLVERS)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="results CSV (default: stdout)")
        p.add_argument("--emit-plot-data", metavar="PATH", help="write (J, error) series as CSV")
        p.add_argument("--paper-scale", action="store_true",
                       help="run the Q=20^3, J=400 targets and check errors within 10x")

    p = sub.add_parser("bench", help="run the experiments in a config")
    run_flags(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", help="run a sweep, optionally comparing two solvers")
    run_flags(p)
    p.add_argument("--compare", help="two solvers, e.g. ipn,amipn")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("list-problems", help="list catalog problems")
    p.set_defaults(func=cmd_list)
    p = sub.add_parser("selftest", help="run the quick property checks")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, UnknownProblem) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
