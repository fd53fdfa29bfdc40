"""Command line benchmark driver.

``splitkit-bench run`` executes a named benchmark under a policy string,
checks every result against a reference computation, and can write a CSV
of per-run measurements, a JSONL trace of execution spans, and an SVG
timeline.  ``splitkit-bench render`` turns a previously written JSONL
trace into an SVG.

Exit codes: 0 success, 1 result failed its reference check, 2 bad usage,
3 file I/O error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import bench as _bench
from .runtime import resolve_worker_count
from .spans import SpanRecorder, emit_spans, load_spans, render_svg

EXIT_OK = 0
EXIT_ORACLE = 1
EXIT_USAGE = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="splitkit-bench",
                description="run task-splitting benchmarks and render traces")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a benchmark")
    run.add_argument("--bench", required=True, choices=_bench.BENCHES)
    run.add_argument("--policy", default="default",
                     help="plus-separated clauses, e.g. bound_depth=4+depjoin "
                          "or thief_splitting+by_blocks=1024,2.0")
    run.add_argument("--workers", type=int, default=None,
                     help="worker thread count (default: SPLITKIT_THREADS "
                          "or the CPU count)")
    run.add_argument("--size", type=int, required=True,
                     help="input size (permutation width for fannkuch)")
    run.add_argument("--runs", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--csv", default=None, help="write per-run rows here")
    run.add_argument("--spans", default=None,
                     help="write a JSONL span trace of the last run here")
    run.add_argument("--svg", default=None,
                     help="render the recorded spans to this SVG file")

    render = sub.add_parser("render", help="render a span trace to SVG")
    render.add_argument("--spans", required=True, help="JSONL trace to read")
    render.add_argument("--svg", required=True, help="SVG file to write")
    return p


def _cmd_run(args) -> int:
    workers = args.workers if args.workers is not None else resolve_worker_count()
    if workers < 1:
        print("splitkit-bench: error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.runs < 1:
        print("splitkit-bench: error: --runs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.size < 0:
        print("splitkit-bench: error: --size must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    if args.svg and not args.spans:
        print("splitkit-bench: error: --svg requires --spans", file=sys.stderr)
        return EXIT_USAGE
    recorder = SpanRecorder() if args.spans else None
    try:
        records = _bench.run(args.bench, args.policy, workers, args.size,
                             args.runs, args.seed, span_recorder=recorder)
    except _bench.OracleMismatch as exc:
        print(f"splitkit-bench: reference check failed: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except ValueError as exc:
        print(f"splitkit-bench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.csv:
            _bench.emit_csv(records, args.csv)
        if args.spans:
            emit_spans(recorder.spans(), args.spans)
        if args.svg:
            render_svg(recorder.spans(), args.svg)
    except OSError as exc:
        print(f"splitkit-bench: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    for r in records:
        print(f"{r.bench} policy={r.policy} workers={r.workers} size={r.size} "
              f"run={r.run} wall_ns={r.wall_ns} steals={r.steals} "
              f"splits={r.splits} consumed={r.consumed}")
    return EXIT_OK


def _cmd_render(args) -> int:
    try:
        spans = load_spans(args.spans)
    except OSError as exc:
        print(f"splitkit-bench: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"splitkit-bench: bad trace: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        render_svg(spans, args.svg)
    except OSError as exc:
        print(f"splitkit-bench: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "render":
        return _cmd_render(args)
    return EXIT_USAGE  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
