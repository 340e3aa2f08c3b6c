"""Command-line interface: run experiments, self-verify, dump debug graphs.

Exit codes: 0 on success, 1 for configuration errors, 2 for runtime
failures (including failed self-checks).
"""

from __future__ import annotations

import argparse
import sys

from . import verify as verify_mod
from .codes import SpecValidationError, get_code, registry_names
from .harness import ConfigError, emit_csv, emit_plot, parse_config, run_experiment


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = parse_config(args.config, seed=args.seed, workers=args.workers,
                           out_dir=args.out_dir)
    except (ConfigError, SpecValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        records = run_experiment(cfg)
        emit_csv(records, cfg.csv_path)
        emit_plot(records, cfg.plot_path)
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    for r in records:
        print(f"{r.code} {r.decoder} p={r.p:g}: ler={r.ler:.3e} "
              f"({r.failures}/{r.trials}), mean_iters={r.mean_iters:.2f}")
    print(f"wrote {cfg.csv_path} and {cfg.plot_path}")
    return 0


def _cmd_verify(_args: argparse.Namespace) -> int:
    return 0 if verify_mod.run_all() else 2


def _cmd_dump_graph(args: argparse.Namespace) -> int:
    from .circuit import build_circuit
    from .jointgraph import dump_graph_files

    try:
        code = get_code(args.code)
    except SpecValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        paths = dump_graph_files(build_circuit(code), args.out_dir)
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ta-decode",
        description="Turbo-annihilation decoding experiments for BB codes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a Monte-Carlo experiment from a config file")
    p_run.add_argument("--config", required=True, help="experiment config file")
    p_run.add_argument("--seed", type=int, default=None, help="base RNG seed")
    p_run.add_argument("--workers", type=int, default=None, help="worker process count")
    p_run.add_argument("--out-dir", default=None, help="directory for output files")
    p_run.set_defaults(fn=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the golden/oracle self-checks")
    p_verify.set_defaults(fn=_cmd_verify)

    p_dump = sub.add_parser("dump-graph", help="dump decoding-graph matrices as text")
    p_dump.add_argument("--code", required=True,
                        help=f"code name ({', '.join(registry_names())})")
    p_dump.add_argument("--out-dir", default="graph-dump")
    p_dump.set_defaults(fn=_cmd_dump_graph)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
