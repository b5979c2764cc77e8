"""Python ``while`` loops whose condition is constantly false."""

from __future__ import annotations

from ..analysis import register
from ..consteval import eval_bool
from ..cst import PYTHON, NodeKind, ParsedFile, node_text, preorder


@register("python_unreachable_while", languages={PYTHON}, columns=("condition_text", "body_text"))
def python_unreachable_while(file: ParsedFile):
    for node in preorder(file.root):
        if node.kind is not NodeKind.WHILE_STMT:
            continue
        parts = node.significant_children()
        if len(parts) < 2 or parts[1].kind is not NodeKind.BLOCK:
            continue  # malformed loop, nothing sound to say
        cond, body = parts[0], parts[1]
        if eval_bool(cond, file).is_false:
            yield node.line, (node_text(file, cond), node_text(file, body))
