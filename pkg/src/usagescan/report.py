"""Summary tables and bar charts over merged analyzer CSVs."""

from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402


class UnknownColumn(KeyError):
    def __init__(self, missing: Sequence[str], available: Sequence[str]):
        super().__init__(missing, available)
        self.missing = list(missing)
        self.available = list(available)

    def __str__(self):
        return (f"unknown column(s) {', '.join(self.missing)}; "
                f"available: {', '.join(self.available)}")


def percent_tenths(count: int, total: int) -> int:
    """100*count/total in tenths of a percent, rounded half up."""
    return (2000 * count + total) // (2 * total)


@dataclass(frozen=True)
class SummaryRow:
    key: tuple[str, ...]
    count: int
    tenths: int

    @property
    def percentage(self) -> float:
        return self.tenths / 10

    @property
    def percent_text(self) -> str:
        return f"{self.tenths // 10}.{self.tenths % 10}"


@dataclass(frozen=True)
class SummaryTable:
    group_keys: tuple[str, ...]
    rows: tuple[SummaryRow, ...]
    total: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.group_keys, "count", "percentage"])
        for r in self.rows:
            w.writerow([*r.key, r.count, r.percent_text])
        return buf.getvalue()


def tabulate(records: Iterable[Sequence[str]], group_keys: Sequence[str]) -> SummaryTable:
    """Group already-projected key tuples."""
    counts = Counter(tuple(r) for r in records)
    total = sum(counts.values())
    rows = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return SummaryTable(tuple(group_keys),
                        tuple(SummaryRow(k, n, percent_tenths(n, total)) for k, n in rows),
                        total)


def summarize(csv_path: str | os.PathLike, group_by: Sequence[str]) -> SummaryTable:
    """Count rows of a merged CSV per distinct value of ``group_by``.

    Rows are ordered by count descending, then key ascending.
    """
    if not group_by:
        raise ValueError("group_by needs at least one column")
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None) or []
        missing = [c for c in group_by if c not in header]
        if missing:
            raise UnknownColumn(missing, header)
        idx = [header.index(c) for c in group_by]
        return tabulate(([row[i] for i in idx] for row in reader if row), group_by)


def build_chart(table: SummaryTable, title: str | None = None) -> Figure:
    """Bar chart with one bar per group; two keys give grouped bars."""
    if not table.rows:
        raise ValueError("cannot chart an empty table")
    if len(table.group_keys) > 2:
        raise ValueError("charts support one or two group keys")
    fig = Figure(figsize=(8, 4.5))
    ax = fig.add_subplot()
    label = lambda r: f"{r.count} ({r.percent_text}%)"

    if len(table.group_keys) == 1:
        names = [r.key[0] for r in table.rows]
        bars = ax.bar(range(len(names)), [r.count for r in table.rows], color="#4878a8")
        ax.bar_label(bars, labels=[label(r) for r in table.rows], fontsize=8)
        ax.set_xticks(range(len(names)), names)
        ax.set_xlabel(table.group_keys[0])
        for i, b in enumerate(bars):
            b.set_gid(f"bar_{i}")
    else:
        groups = list(dict.fromkeys(r.key[0] for r in table.rows))
        series = list(dict.fromkeys(r.key[1] for r in table.rows))
        by_key = {r.key: r for r in table.rows}
        width = 0.8 / len(series)
        colors = plt.get_cmap("tab10")
        n = 0
        for j, s in enumerate(series):
            xs, heights, labels = [], [], []
            for i, g in enumerate(groups):
                r = by_key.get((g, s))
                if r is not None:
                    xs.append(i - 0.4 + width * (j + 0.5))
                    heights.append(r.count)
                    labels.append(label(r))
            bars = ax.bar(xs, heights, width, label=s, color=colors(j % 10))
            ax.bar_label(bars, labels=labels, fontsize=7)
            for b in bars:
                b.set_gid(f"bar_{n}")
                n += 1
        ax.set_xticks(range(len(groups)), groups)
        ax.set_xlabel(table.group_keys[0])
        ax.legend(title=table.group_keys[1], fontsize=8)
    ax.set_ylabel("count")
    ax.margins(y=0.15)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


_FORMATS = {".svg": "svg", ".pdf": "pdf", ".png": "png"}


def emit_chart(table: SummaryTable, out: str | os.PathLike, title: str | None = None) -> Path:
    """Write the chart to ``out``; byte-identical for identical tables.

    The format follows the suffix (.svg, .pdf or .png).
    """
    out = Path(out)
    fmt = _FORMATS.get(out.suffix.lower())
    if fmt is None:
        raise ValueError(f"unsupported chart format {out.suffix!r}; use .svg, .pdf or .png")
    fig = build_chart(table, title)
    # timestamps and random ids are the only nondeterministic parts
    metadata = {"svg": {"Date": None}, "pdf": {"CreationDate": None, "ModDate": None},
                "png": {"Software": None}}[fmt]
    with matplotlib.rc_context({"svg.hashsalt": "usagescan", "svg.fonttype": "path"}):
        fig.savefig(out, format=fmt, metadata=metadata)
    return out
