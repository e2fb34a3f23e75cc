"""Command-line front end.

Subcommands:

* precompute: build a cut table and serialize it
* run: execute an experiment config, write the report CSV and figures
* bench: measure per-element throughput on a constant stream
* table-export: dump a serialized cut table to CSV for inspection

Exit codes: 0 on success, 2 for usage or config errors, 1 for runtime
failures. The OPTWIN_OUT_DIR environment variable, when set, redirects
the directory part of the run report path.
"""

from __future__ import annotations

import argparse
import gc
import os
import sys
import time
from typing import Callable

from .baselines import (
    AdwinDetector,
    DdmDetector,
    EcddDetector,
    EddmDetector,
    StepdDetector,
)
from .detector import CutTable, OptwinConfig, OptwinDetector, build_cut_table
from .evaluation import write_report
from .experiments import ConfigError, load_config, run_suite

__all__ = ["main", "bench_ns_per_element"]


def _ensure_parent(path: str) -> None:
    """Create the directory an output file will land in."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _confidence(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optwin", description="Streaming drift detection toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("precompute", help="build and serialize a cut table")
    p.add_argument("--delta", type=_confidence, default=0.99, help="confidence level")
    p.add_argument("--rho", type=_positive_float, required=True, help="robustness")
    p.add_argument("--w-max", type=_positive_int, default=25000)
    p.add_argument("--w-min", type=_positive_int, default=30)
    p.add_argument("--out", required=True, help="output table file")

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", help="report CSV path (defaults to config output)")
    p.add_argument("--jobs", type=_positive_int, default=1, help="parallel workers")
    p.add_argument("--seed-base", type=int, default=0, help="offset added to all seeds")
    p.add_argument(
        "--no-figures", action="store_true", help="skip rendering figures"
    )

    p = sub.add_parser("bench", help="measure per-element cost on a constant stream")
    p.add_argument(
        "--detector",
        default="optwin",
        choices=["optwin", "adwin", "ddm", "eddm", "stepd", "ecdd"],
    )
    p.add_argument("--n", type=_positive_int, default=1_000_000, help="elements (>= 1e5)")
    p.add_argument("--w-max", type=_positive_int, default=1000, help="optwin window cap")
    p.add_argument("--rho", type=_positive_float, default=0.5)

    p = sub.add_parser("table-export", help="dump a serialized cut table to CSV")
    p.add_argument("--table", required=True, help="binary table file")
    p.add_argument("--out", required=True, help="CSV output path")

    return parser


def cmd_precompute(args: argparse.Namespace) -> int:
    if args.w_min < 30:
        print("error: --w-min must be at least 30", file=sys.stderr)
        return 2
    if args.w_max < args.w_min:
        print("error: --w-max must be at least --w-min", file=sys.stderr)
        return 2
    config = OptwinConfig(
        delta=args.delta, rho=args.rho, w_max=args.w_max, w_min=args.w_min
    )
    _ensure_parent(args.out)
    started = time.perf_counter()
    table = build_cut_table(config)
    elapsed = time.perf_counter() - started
    table.save(args.out)
    size = os.path.getsize(args.out)
    proof = table.w_proof if table.w_proof is not None else "none"
    print(f"built {len(table)} rows in {elapsed:.1f} s: w_proof={proof}, {size} bytes")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    suite = load_config(args.config)
    out = args.out or suite.output
    out_dir = os.environ.get("OPTWIN_OUT_DIR")
    if out_dir:
        out = os.path.join(out_dir, os.path.basename(out))
    _ensure_parent(out)
    result = run_suite(suite, jobs=args.jobs, seed_base=args.seed_base)
    write_report(out, result.rows)
    print(f"wrote {out} ({len(result.rows)} rows)")
    if not args.no_figures:
        from .figures import render_figures

        for path in render_figures(result, out):
            print(f"wrote {path}")
    return 0


def _bench_factory(args: argparse.Namespace) -> Callable[[], object]:
    name = args.detector
    if name == "optwin":
        config = OptwinConfig(rho=args.rho, w_max=args.w_max)
        table = build_cut_table(config)
        return lambda: OptwinDetector(config, table)
    kinds = {
        "adwin": AdwinDetector,
        "ddm": DdmDetector,
        "eddm": EddmDetector,
        "stepd": StepdDetector,
        "ecdd": EcddDetector,
    }
    return kinds[name]


def bench_ns_per_element(make_detector: Callable[[], object], n: int) -> float:
    """Feed n constant elements to a fresh detector; ns per element.

    Garbage collection pauses during the timed loop so allocator noise
    does not distort the scaling comparison.
    """
    detector = make_detector()
    add = detector.add_element
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        started = time.perf_counter()
        for _ in range(n):
            add(0.0)
        elapsed = time.perf_counter() - started
    finally:
        if was_enabled:
            gc.enable()
    return elapsed * 1e9 / n


def cmd_bench(args: argparse.Namespace) -> int:
    if args.n < 100_000:
        print("error: --n must be at least 100000", file=sys.stderr)
        return 2
    build_started = time.perf_counter()
    factory = _bench_factory(args)
    build_elapsed = time.perf_counter() - build_started
    if args.detector == "optwin":
        print(f"cut table build: {build_elapsed:.2f} s (excluded from timings)")
    ns_single = bench_ns_per_element(factory, args.n)
    ns_double = bench_ns_per_element(factory, 2 * args.n)
    ratio = (2 * args.n * ns_double) / (args.n * ns_single)
    print(f"n={args.n}: {ns_single:.1f} ns/element")
    print(f"n={2 * args.n}: {ns_double:.1f} ns/element")
    print(f"time ratio (2n vs n): {ratio:.2f}")
    return 0


def cmd_table_export(args: argparse.Namespace) -> int:
    table = CutTable.load(args.table)
    _ensure_parent(args.out)
    table.export_csv(args.out)
    print(f"wrote {args.out} ({len(table)} rows)")
    return 0


_COMMANDS = {
    "precompute": cmd_precompute,
    "run": cmd_run,
    "bench": cmd_bench,
    "table-export": cmd_table_export,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
