"""Batch orchestration: enumerate, parse, analyze, checkpoint, merge."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .analysis import Analyzer, AnalyzerFailure, load_builtin_analyzers, run_analyzers
from .dataset import (Batch, CloneFn, MaterializeError, ProjectRef, RepoLookup, dedup,
                      git_clone, load_input, make_batches, materialize)
from .frontends import UndecodableFile, parse_bytes, registry as frontends

log = logging.getLogger(__name__)

DEFAULT_IGNORE = frozenset({".git", "build", "out", "node_modules", ".gradle", "venv", "__pycache__"})
FIXED_COLUMNS = ("project_id", "file_path", "line")
MARKER = "_COMPLETE"
MANIFEST = "manifest.jsonl"

OK, PARSE_PARTIAL, FAILED = "ok", "parse_partial", "failed"


@dataclass
class RunConfig:
    input: Path
    output_dir: Path
    analyzer_ids: Sequence[str]
    batch_size: int = 100
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    resume: bool = False
    online_dedup: bool = False
    ignore: frozenset[str] = DEFAULT_IGNORE
    workdir: Path | None = None  # where remote projects are cloned; default output_dir/checkouts
    lookup: RepoLookup | None = None
    clone: CloneFn = git_clone

    def __post_init__(self):
        self.input = Path(self.input)
        self.output_dir = Path(self.output_dir)
        self.ignore = frozenset(self.ignore)
        # ordered set: drop repeats, keep first position
        self.analyzer_ids = tuple(dict.fromkeys(self.analyzer_ids))
        if not self.analyzer_ids:
            raise ValueError("at least one analyzer is required")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be positive, got {self.batch_size}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be positive, got {self.jobs}")
        reg = load_builtin_analyzers()
        for a in self.analyzer_ids:
            reg.get(a)  # raises UnknownAnalyzer listing what exists

    def analyzers(self) -> list[Analyzer]:
        reg = load_builtin_analyzers()
        return [reg.get(a) for a in self.analyzer_ids]


@dataclass
class ProjectEntry:
    project_id: str
    status: str
    files_analyzed: int
    duration: float
    batch: int
    files_skipped: int = 0
    diagnostics: list[str] = field(default_factory=list)

    @classmethod
    def from_json(cls, d: dict) -> ProjectEntry:
        return cls(**d)


@dataclass
class RunManifest:
    entries: list[ProjectEntry] = field(default_factory=list)
    completed_batches: list[int] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(e.status == FAILED for e in self.entries)

    def entry(self, project_id: str) -> ProjectEntry:
        return next(e for e in self.entries if e.project_id == project_id)

    @classmethod
    def load(cls, output_dir: str | os.PathLike) -> RunManifest:
        out = Path(output_dir)
        m = cls(entries=_read_entries(out / MANIFEST))
        m.completed_batches = sorted({e.batch for e in m.entries
                                      if (batch_dir(out, e.batch) / MARKER).exists()})
        return m


def batch_dir(output_dir: Path, index: int) -> Path:
    return output_dir / f"batch_{index}"


_BATCH_DIR = re.compile(r"batch_(\d+)")


def _batch_dirs(output_dir: Path) -> list[tuple[int, Path]]:
    found = []
    for d in output_dir.iterdir() if output_dir.is_dir() else ():
        m = _BATCH_DIR.fullmatch(d.name)
        if m and d.is_dir():
            found.append((int(m.group(1)), d))
    return sorted(found)


def _read_entries(path: Path) -> list[ProjectEntry]:
    if not path.exists():
        return []
    with open(path, encoding="utf-8") as fh:
        return [ProjectEntry.from_json(json.loads(line)) for line in fh if line.strip()]


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _entries_jsonl(entries: Iterable[ProjectEntry]) -> str:
    return "".join(json.dumps(asdict(e), sort_keys=True) + "\n" for e in entries)


def enumerate_files(root: Path, ignore: frozenset[str] = DEFAULT_IGNORE) -> list[str]:
    """Supported source files under ``root`` as sorted relative '/' paths."""
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d not in ignore)
        rel = Path(dirpath).relative_to(root)
        for name in filenames:
            if frontends.lookup(name) is not None:
                found.append((rel / name).as_posix())
    return sorted(found)


@dataclass
class FileResult:
    path: str
    records: list
    analyzed: bool
    partial: bool
    diagnostics: list[str]


def analyze_file(root: Path, rel_path: str, project_id: str, analyzers: Sequence[Analyzer]) -> FileResult:
    try:
        data = (root / rel_path).read_bytes()
        parsed = parse_bytes(data, rel_path)
    except UndecodableFile as e:
        return FileResult(rel_path, [], False, True, [f"skipped {e}"])
    except OSError as e:
        return FileResult(rel_path, [], False, True, [f"skipped {rel_path}: {e.strerror or e}"])
    diags = [f"{rel_path}: {d}" for d in parsed.diagnostics]
    failures: list[AnalyzerFailure] = []
    records = run_analyzers(parsed, project_id, analyzers, failures)
    diags += [str(f) for f in failures]
    return FileResult(rel_path, records, True, bool(diags), diags)


class _CsvSink:
    """One CSV per analyzer; only the orchestrating thread writes."""

    def __init__(self, directory: Path, analyzers: Sequence[Analyzer]):
        self.files = {}
        self.writers = {}
        for a in analyzers:
            fh = open(directory / f"{a.id}.csv", "w", encoding="utf-8", newline="")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*FIXED_COLUMNS, *a.columns])
            self.files[a.id] = fh
            self.writers[a.id] = w

    def write(self, records) -> None:
        for r in records:
            self.writers[r.analyzer_id].writerow(r.row())

    def close(self) -> None:
        for fh in self.files.values():
            fh.flush()
            os.fsync(fh.fileno())
            fh.close()


def process_project(ref: ProjectRef, batch: int, config: RunConfig, analyzers: Sequence[Analyzer],
                    sink: _CsvSink, pool: ThreadPoolExecutor | None) -> ProjectEntry:
    t0 = time.perf_counter()
    workdir = config.workdir or config.output_dir / "checkouts"
    try:
        root = materialize(ref, workdir, config.clone)
    except MaterializeError as e:
        log.error("project %s failed: %s", ref.project_id, e)
        return ProjectEntry(ref.project_id, FAILED, 0, time.perf_counter() - t0, batch,
                            diagnostics=[str(e)])
    try:
        files = enumerate_files(root, config.ignore)
        work = lambda rel: analyze_file(root, rel, ref.project_id, analyzers)
        results = pool.map(work, files) if pool is not None else map(work, files)
        analyzed = skipped = 0
        partial = False
        diags: list[str] = []
        for res in results:  # in file order, whatever the completion order was
            sink.write(res.records)
            analyzed += res.analyzed
            skipped += not res.analyzed
            partial |= res.partial
            diags += res.diagnostics
    except OSError as e:
        log.error("project %s failed: %s", ref.project_id, e)
        return ProjectEntry(ref.project_id, FAILED, 0, time.perf_counter() - t0, batch,
                            diagnostics=[f"{type(e).__name__}: {e}"])
    for d in diags:
        log.info("%s: %s", ref.project_id, d)
    return ProjectEntry(ref.project_id, PARSE_PARTIAL if partial else OK, analyzed,
                        time.perf_counter() - t0, batch, skipped, diags)


def _marker_matches(directory: Path, batch: Batch, analyzer_ids: Sequence[str]) -> bool:
    marker = directory / MARKER
    if not marker.exists():
        return False
    try:
        info = json.loads(marker.read_text(encoding="utf-8"))
    except ValueError:
        return False
    return (info.get("projects") == [p.project_id for p in batch.projects]
            and info.get("analyzers") == list(analyzer_ids))


def process_batch(batch: Batch, config: RunConfig, analyzers: Sequence[Analyzer],
                  pool: ThreadPoolExecutor | None) -> list[ProjectEntry]:
    """Analyze one batch and checkpoint it; the marker is written last."""
    directory = batch_dir(config.output_dir, batch.index)
    if directory.exists():
        shutil.rmtree(directory)
    directory.mkdir(parents=True)
    sink = _CsvSink(directory, analyzers)
    try:
        entries = [process_project(ref, batch.index, config, analyzers, sink, pool)
                   for ref in batch.projects]
    finally:
        sink.close()
    _write_atomic(directory / MANIFEST, _entries_jsonl(entries))
    marker = {"projects": [p.project_id for p in batch.projects],
              "analyzers": [a.id for a in analyzers]}
    _write_atomic(directory / MARKER, json.dumps(marker, sort_keys=True) + "\n")
    return entries


def run(config: RunConfig) -> RunManifest:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    analyzers = config.analyzers()
    manifest = RunManifest()
    refs = load_input(config.input, manifest.diagnostics)
    refs = dedup(refs, config.online_dedup, config.lookup, manifest.diagnostics)
    batches = make_batches(refs, config.batch_size)

    # leftovers from earlier runs with a different plan would pollute merge
    for index, d in _batch_dirs(out):
        if index >= len(batches) or not config.resume:
            shutil.rmtree(d)

    pool = ThreadPoolExecutor(config.jobs) if config.jobs > 1 else None
    try:
        for batch in batches:
            directory = batch_dir(out, batch.index)
            if config.resume and _marker_matches(directory, batch, config.analyzer_ids):
                log.info("batch %d already complete, skipping", batch.index)
                entries = _read_entries(directory / MANIFEST)
            else:
                t0 = time.perf_counter()
                entries = process_batch(batch, config, analyzers, pool)
                log.info("batch %d: %d projects in %.2fs", batch.index, len(entries),
                         time.perf_counter() - t0)
            manifest.entries.extend(entries)
            manifest.completed_batches.append(batch.index)
            _write_atomic(out / MANIFEST, _entries_jsonl(manifest.entries))
    finally:
        if pool is not None:
            pool.shutdown()
    if not batches:
        _write_atomic(out / MANIFEST, "")
    merge(out, analyzers)
    return manifest


class MergeError(Exception):
    pass


def _sort_key(row: list[str]):
    line = int(row[2]) if row[2].isdigit() else 0
    return (row[0], row[1], line, row[2], tuple(row[3:]))


def _render_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def merge(output_dir: str | os.PathLike, analyzers: Sequence[Analyzer] | None = None) -> dict[str, Path]:
    """Combine the CSVs of all completed batches into ``<analyzer_id>.csv``.

    Rows are sorted by (project_id, file_path, line, values) so the
    result does not depend on batch size or worker count. Batches
    without a completion marker are skipped with a warning.
    """
    out = Path(output_dir)
    completed = []
    for index, d in _batch_dirs(out):
        if (d / MARKER).exists():
            completed.append(d)
        else:
            log.warning("batch %d has no completion marker; excluded from merge", index)
    if analyzers is None:
        if not completed:
            raise MergeError(f"no completed batches in {out}")
        headers = {}
    else:
        headers = {a.id: [*FIXED_COLUMNS, *a.columns] for a in analyzers}
    ids = list(headers) or sorted({p.stem for d in completed for p in d.glob("*.csv")})

    merged = {}
    for aid in ids:
        header = headers.get(aid)
        rows: list[list[str]] = []
        for d in completed:
            path = d / f"{aid}.csv"
            if not path.exists():
                continue
            with open(path, encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                file_header = next(reader, None)
                if file_header is None:
                    continue
                if header is None:
                    header = file_header
                elif file_header != header:
                    raise MergeError(f"{path}: header {file_header} differs from {header}")
                rows.extend(reader)
        if header is None:
            continue
        rows.sort(key=_sort_key)
        target = out / f"{aid}.csv"
        _write_atomic(target, _render_csv(header, rows))
        merged[aid] = target
    return merged
