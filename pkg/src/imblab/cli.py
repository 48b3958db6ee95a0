"""Command-line entry point: ``imblab generate | run | report``.

Exit status is 0 on success, 1 for invalid input (arguments, config,
data), 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .datagen import ExampleId, make_dataset, write_dataset
from .errors import ConfigError, ImblabError, NoData
from .harness.config import ExperimentConfig, apply_seed_env, fast_profile, load_config
from .harness.report import render_report
from .harness.results import read_results, write_failures, write_results
from .harness.runner import run_experiment

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Invalid(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imblab", description="Imbalanced classification benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write one synthetic dataset as CSV")
    g.add_argument("--example", required=True, choices=["1", "2"])
    g.add_argument("--ir", required=True, type=float, help="imbalance ratio n1/n0 (>= 1)")
    g.add_argument("--n0", required=True, type=_positive_int, help="number of class-0 points")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run an experiment sweep and write aggregated results")
    r.add_argument("--config", help="JSON config (defaults when omitted)")
    r.add_argument("--out", required=True, help="results CSV")
    r.add_argument("--fast", action="store_true", help="30 reps, m0=500, IR in {1, 8, 128}")
    r.add_argument("--threads", type=_positive_int, default=1, help="worker processes")
    r.add_argument("--quiet", action="store_true", help="no progress output")

    p = sub.add_parser("report", help="render figures and tables from a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--out-dir", required=True)
    return parser


def _generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    ds = make_dataset(ExampleId.parse(args.example), args.ir, args.n0, rng)
    write_dataset(ds, args.out)
    print(f"wrote {ds.n} rows ({ds.n0} class 0, {ds.n1} class 1) to {args.out}")
    return EXIT_OK


def _run(args) -> int:
    cfg = load_config(Path(args.config)) if args.config else ExperimentConfig()
    if args.fast:
        cfg = fast_profile(cfg)
    cfg = apply_seed_env(cfg)

    def progress(done, total):
        if not args.quiet and (done == total or done % max(1, total // 100) == 0):
            print(f"\r{done}/{total} tasks", end="\n" if done == total else "", file=sys.stderr, flush=True)

    print(
        f"{cfg.n_cells} cells x {cfg.repetitions} reps, master seed {cfg.master_seed}, {args.threads} worker(s)",
        file=sys.stderr,
    )
    run = run_experiment(cfg, threads=args.threads, progress=progress)
    out = Path(args.out)
    if run.records:
        write_results(run.records, out)
        print(f"wrote {len(run.records)} records to {out} in {run.seconds:.1f}s", file=sys.stderr)
    for msg, count in sorted(run.warnings.items()):
        print(f"warning ({count} fits): {msg}", file=sys.stderr)
    if run.failures:
        err_path = out.with_name(out.stem + ".errors.csv")
        write_failures(run.failures, err_path)
        print(f"{run.n_failures} failed repetitions recorded in {err_path}", file=sys.stderr)
    if not run.records:
        raise NoData("every repetition failed; no results written")
    return EXIT_OK


def _report(args) -> int:
    try:
        records = read_results(args.results)
    except ValueError as exc:
        raise _Invalid(str(exc)) from None
    paths = render_report(records, args.out_dir)
    print(f"wrote {len(paths)} files to {args.out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    handler = {"generate": _generate, "run": _run, "report": _report}[args.command]
    try:
        return handler(args)
    except (ConfigError, _Invalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ImblabError as exc:
        code = EXIT_RUNTIME if isinstance(exc, NoData) else EXIT_INVALID
        print(f"error: {exc}", file=sys.stderr)
        return code
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
