"""Per-file counts of selected construct kinds."""

from __future__ import annotations

from collections import Counter
from typing import Iterable

from ..analysis import Analyzer, register
from ..cst import KOTLIN, PYTHON, NodeKind, ParsedFile, preorder

DEFAULT_KINDS = (NodeKind.FOR_STMT, NodeKind.WHILE_STMT, NodeKind.IF_STMT,
                 NodeKind.WHEN_STMT, NodeKind.FUNCTION_DECL)


def count_rows(file: ParsedFile, kinds: Iterable[NodeKind]):
    # line is the first occurrence, so every row still points into the file
    kinds = tuple(kinds)
    wanted = set(kinds)
    counts: Counter = Counter()
    first: dict[NodeKind, int] = {}
    for node in preorder(file.root):
        if node.kind in wanted:
            counts[node.kind] += 1
            first.setdefault(node.kind, node.line)
    for kind in kinds:
        if counts[kind]:
            yield first[kind], (kind.name, counts[kind])


def make_keyword_counter(kinds: Iterable[NodeKind], analyzer_id: str) -> Analyzer:
    """An unregistered counter over a custom set of kinds."""
    kinds = tuple(kinds)
    return Analyzer(analyzer_id, frozenset({KOTLIN, PYTHON}), ("keyword", "count"),
                    lambda file: count_rows(file, kinds))


@register("keyword_count", languages={KOTLIN, PYTHON}, columns=("keyword", "count"))
def keyword_count(file: ParsedFile):
    return count_rows(file, DEFAULT_KINDS)
