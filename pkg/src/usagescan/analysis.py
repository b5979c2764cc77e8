"""Analyzer contract, registry, single-pass execution and context resolution."""

from __future__ import annotations

import importlib
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

from .cst import NodeKind, ParsedFile, SyntaxNode, ancestors

log = logging.getLogger(__name__)

ProjectId = str
ANALYZER_ID = re.compile(r"[a-z0-9_]+")


@dataclass(frozen=True, slots=True)
class AnalysisRecord:
    analyzer_id: str
    project_id: ProjectId
    file_path: str
    line: int
    values: tuple[str, ...]

    def __post_init__(self):
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")
        if "\\" in self.file_path or self.file_path.startswith("/"):
            raise ValueError(f"file_path must be relative with '/' separators: {self.file_path!r}")

    def row(self) -> list[str]:
        """CSV row: the fixed columns followed by the analyzer's columns."""
        return [self.project_id, self.file_path, str(self.line), *self.values]


@dataclass(frozen=True, slots=True)
class AnalyzerFailure:
    analyzer_id: str
    file_path: str
    message: str

    def __str__(self):
        return f"analyzer {self.analyzer_id} failed on {self.file_path}: {self.message}"


class AnalyzerError(Exception):
    """An analyzer broke its own contract (wrong column count, bad id)."""


# What a row function yields: (1-based line, column values)
Row = tuple[int, Sequence[object]]
RowFn = Callable[[ParsedFile], Iterable[Row]]


@dataclass(frozen=True)
class Analyzer:
    id: str
    languages: frozenset[str]
    columns: tuple[str, ...]
    rows: RowFn = field(repr=False)

    def __post_init__(self):
        if not ANALYZER_ID.fullmatch(self.id):
            raise AnalyzerError(f"analyzer id {self.id!r} must match [a-z0-9_]+")
        object.__setattr__(self, "languages", frozenset(self.languages))
        object.__setattr__(self, "columns", tuple(self.columns))

    def supports(self, language: str) -> bool:
        return language in self.languages

    def extract(self, file: ParsedFile, project_id: ProjectId) -> list[AnalysisRecord]:
        out = []
        for line, values in self.rows(file):
            values = tuple(str(v) for v in values)
            if len(values) != len(self.columns):
                raise AnalyzerError(
                    f"{self.id} emitted {len(values)} values for columns {list(self.columns)}")
            out.append(AnalysisRecord(self.id, project_id, file.path, line, values))
        return out


class UnknownAnalyzer(KeyError):
    def __str__(self):
        return self.args[0]


class AnalyzerRegistry:
    def __init__(self):
        self._by_id: dict[str, Analyzer] = {}

    def add(self, analyzer: Analyzer) -> Analyzer:
        existing = self._by_id.get(analyzer.id)
        if existing is not None and existing is not analyzer:
            raise AnalyzerError(f"analyzer id {analyzer.id!r} is already registered")
        self._by_id[analyzer.id] = analyzer
        return analyzer

    def get(self, analyzer_id: str) -> Analyzer:
        try:
            return self._by_id[analyzer_id]
        except KeyError:
            raise UnknownAnalyzer(
                f"unknown analyzer {analyzer_id!r}; available: {', '.join(self.ids())}") from None

    def ids(self) -> list[str]:
        return list(self._by_id)

    def all(self) -> list[Analyzer]:
        return list(self._by_id.values())

    def resolve(self, ids: Iterable[str]) -> list[Analyzer]:
        """Look up ids (duplicates dropped), returned in registration order."""
        wanted = {self.get(i).id for i in ids}
        return [a for a in self._by_id.values() if a.id in wanted]

    def __contains__(self, analyzer_id: str) -> bool:
        return analyzer_id in self._by_id


registry = AnalyzerRegistry()


def load_builtin_analyzers() -> AnalyzerRegistry:
    importlib.import_module(".analyzers", __package__)
    return registry


def register(analyzer_id: str, languages: Iterable[str], columns: Sequence[str],
             into: AnalyzerRegistry | None = None):
    """Decorator turning a row function into a registered Analyzer.

    The row function receives a ParsedFile and yields ``(line, values)``
    pairs; the framework fills in analyzer id, project and path.
    """
    def wrap(fn: RowFn) -> Analyzer:
        a = Analyzer(analyzer_id, frozenset(languages), tuple(columns), fn)
        return (into or registry).add(a)
    return wrap


def run_analyzers(file: ParsedFile, project_id: ProjectId, analyzers: Sequence[Analyzer],
                  diagnostics: list[AnalyzerFailure] | None = None) -> list[AnalysisRecord]:
    """Run every applicable analyzer over one already-parsed file.

    A failing analyzer contributes no records and one AnalyzerFailure;
    the others are unaffected.
    """
    records: list[AnalysisRecord] = []
    for a in analyzers:
        if not a.supports(file.language):
            continue
        try:
            records.extend(a.extract(file, project_id))
        except Exception as e:  # isolate per (analyzer, file)
            failure = AnalyzerFailure(a.id, file.path, f"{type(e).__name__}: {e}")
            log.warning("%s", failure)
            if diagnostics is not None:
                diagnostics.append(failure)
    return records


class ContextKind(Enum):
    FOR = "FOR"
    WHILE = "WHILE"
    IF = "IF"
    WHEN = "WHEN"
    FUNCTION = "FUNCTION"
    TOP_LEVEL = "TOP_LEVEL"


_CONTEXT_OF = {
    NodeKind.FOR_STMT: ContextKind.FOR,
    NodeKind.WHILE_STMT: ContextKind.WHILE,
    NodeKind.DO_WHILE_STMT: ContextKind.WHILE,
    NodeKind.IF_STMT: ContextKind.IF,
    NodeKind.WHEN_STMT: ContextKind.WHEN,
    NodeKind.FUNCTION_DECL: ContextKind.FUNCTION,
}


def resolve_context(node: SyntaxNode) -> ContextKind:
    """Context of the nearest enclosing construct; lambdas are see-through."""
    for anc in ancestors(node):
        ctx = _CONTEXT_OF.get(anc.kind)
        if ctx is not None:
            return ctx
    return ContextKind.TOP_LEVEL
