"""Which of the four Kotlin range syntaxes is used, and where."""

from __future__ import annotations

from enum import Enum

from ..analysis import register, resolve_context
from ..cst import KOTLIN, NodeKind, ParsedFile, SyntaxNode, preorder


class RangeKind(Enum):
    DOTDOT = "DOTDOT"
    UNTIL = "UNTIL"
    RANGE_TO = "RANGE_TO"
    DOWN_TO = "DOWN_TO"


_KINDS = {
    (NodeKind.BINARY_EXPR, ".."): RangeKind.DOTDOT,
    (NodeKind.INFIX_CALL, "until"): RangeKind.UNTIL,
    (NodeKind.INFIX_CALL, "downTo"): RangeKind.DOWN_TO,
    (NodeKind.MEMBER_CALL, "rangeTo"): RangeKind.RANGE_TO,
    (NodeKind.MEMBER_CALL, "downTo"): RangeKind.DOWN_TO,
}


def range_kind(node: SyntaxNode) -> RangeKind | None:
    return _KINDS.get((node.kind, node.aux))


@register("kotlin_ranges", languages={KOTLIN}, columns=("range_kind", "context_kind"))
def kotlin_ranges(file: ParsedFile):
    for node in preorder(file.root):
        kind = _KINDS.get((node.kind, node.aux))
        if kind is not None:
            yield node.line, (kind.value, resolve_context(node).value)
