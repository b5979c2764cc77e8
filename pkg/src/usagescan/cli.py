"""Command-line entry point: analyze, merge, report."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import UnknownAnalyzer, load_builtin_analyzers
from .report import UnknownColumn, emit_chart, summarize
from .runner import DEFAULT_IGNORE, MergeError, RunConfig, merge, run

log = logging.getLogger("usagescan")


def _csv_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="usagescan", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run analyzers over a project list or corpus directory")
    a.add_argument("--input", required=True, type=Path,
                   help="project list file, or a directory whose subdirectories are projects")
    a.add_argument("--output", required=True, type=Path)
    a.add_argument("--analyzers", required=True, type=_csv_list,
                   help="comma-separated analyzer ids")
    a.add_argument("--batch-size", type=_positive, default=100)
    a.add_argument("--jobs", type=_positive, default=os.cpu_count() or 1)
    a.add_argument("--resume", action="store_true")
    a.add_argument("--online-dedup", action="store_true",
                   help="resolve moved repositories through the hosting service")
    a.add_argument("--ignore", type=_csv_list, default=sorted(DEFAULT_IGNORE),
                   help="directory names to skip (default: %(default)s)")

    m = sub.add_parser("merge", help="merge completed batch outputs")
    m.add_argument("--output", required=True, type=Path)

    r = sub.add_parser("report", help="summary table and chart for a merged CSV")
    r.add_argument("--input", required=True, type=Path)
    r.add_argument("--group-by", required=True, type=_csv_list)
    r.add_argument("--chart", type=Path, help="chart file (.svg, .pdf or .png)")
    r.add_argument("--table", type=Path, help="write the summary table as CSV")
    r.add_argument("--title")

    sub.add_parser("list", help="list available analyzers")
    return p


def _analyze(args) -> int:
    if not args.input.exists():
        raise SystemExit(f"usagescan: input {args.input} does not exist")
    config = RunConfig(args.input, args.output, args.analyzers, args.batch_size, args.jobs,
                       args.resume, args.online_dedup, frozenset(args.ignore))
    manifest = run(config)
    files = sum(e.files_analyzed for e in manifest.entries)
    print(f"{len(manifest.entries)} projects, {files} files, {manifest.failed} failed; "
          f"results in {args.output}")
    return 0 if manifest.failed == 0 else 1


def _merge(args) -> int:
    for aid, path in merge(args.output).items():
        print(f"{aid}: {path}")
    return 0


def _report(args) -> int:
    table = summarize(args.input, args.group_by)
    text = table.to_csv()
    sys.stdout.write(text)
    if args.table:
        args.table.write_text(text, encoding="utf-8")
    if args.chart:
        if not table.rows:
            raise SystemExit("usagescan: nothing to chart, the input has no rows")
        try:
            emit_chart(table, args.chart, args.title)
        except OSError as e:
            raise SystemExit(f"usagescan: cannot write chart {args.chart}: {e.strerror or e}")
    return 0


def _list(args) -> int:
    for a in load_builtin_analyzers().all():
        print(f"{a.id}\t{','.join(sorted(a.languages))}\t{','.join(a.columns)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handler = {"analyze": _analyze, "merge": _merge, "report": _report, "list": _list}[args.command]
    try:
        return handler(args)
    except (UnknownAnalyzer, UnknownColumn, MergeError, ValueError) as e:
        print(f"usagescan: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"usagescan: {e.filename}: no such file", file=sys.stderr)
        return 2
