"""Language-independent concrete syntax tree.

Frontends build trees of :class:`SyntaxNode`; analyzers only ever see
these nodes, so an analyzer written against node kinds works for any
registered language.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterator

KOTLIN = "kotlin"
PYTHON = "python"

# A source language is a short tag; frontends may register new ones.
SourceLanguage = str


class NodeKind(Enum):
    FILE = "FILE"
    FUNCTION_DECL = "FUNCTION_DECL"
    BLOCK = "BLOCK"
    FOR_STMT = "FOR_STMT"
    WHILE_STMT = "WHILE_STMT"
    DO_WHILE_STMT = "DO_WHILE_STMT"
    IF_STMT = "IF_STMT"
    WHEN_STMT = "WHEN_STMT"
    BINARY_EXPR = "BINARY_EXPR"
    INFIX_CALL = "INFIX_CALL"
    CALL_EXPR = "CALL_EXPR"
    MEMBER_CALL = "MEMBER_CALL"
    PAREN_EXPR = "PAREN_EXPR"
    UNARY_EXPR = "UNARY_EXPR"
    LAMBDA = "LAMBDA"
    INT_LITERAL = "INT_LITERAL"
    BOOL_LITERAL = "BOOL_LITERAL"
    STRING_LITERAL = "STRING_LITERAL"
    IDENTIFIER = "IDENTIFIER"
    OPERATOR_TOKEN = "OPERATOR_TOKEN"
    COMMENT = "COMMENT"
    OTHER = "OTHER"


# Kinds that carry no expression meaning of their own.
TRIVIA_KINDS = frozenset({NodeKind.COMMENT, NodeKind.OPERATOR_TOKEN})


@dataclass(frozen=True, slots=True)
class Span:
    start_byte: int
    end_byte: int
    start_line: int = 1

    def __post_init__(self):
        if not 0 <= self.start_byte <= self.end_byte:
            raise ValueError(f"bad span [{self.start_byte}, {self.end_byte})")
        if self.start_line < 1:
            raise ValueError(f"line numbers start at 1, got {self.start_line}")

    def contains(self, other: Span) -> bool:
        return self.start_byte <= other.start_byte and other.end_byte <= self.end_byte


@dataclass(eq=False, slots=True)
class SyntaxNode:
    kind: NodeKind
    span: Span
    children: list[SyntaxNode] = field(default_factory=list)
    parent: SyntaxNode | None = None
    aux: str | None = None

    def __repr__(self):
        aux = f" {self.aux!r}" if self.aux is not None else ""
        return (f"<{self.kind.value}{aux} [{self.span.start_byte}:"
                f"{self.span.end_byte}] line {self.span.start_line}>")

    @property
    def line(self) -> int:
        return self.span.start_line

    def significant_children(self) -> list[SyntaxNode]:
        """Children without comments and operator tokens."""
        return [c for c in self.children if c.kind not in TRIVIA_KINDS]

    def first_child(self, kind: NodeKind) -> SyntaxNode | None:
        for c in self.children:
            if c.kind is kind:
                return c
        return None


@dataclass(eq=False)
class ParsedFile:
    path: str
    language: SourceLanguage
    root: SyntaxNode
    source_text: str
    diagnostics: list[str] = field(default_factory=list)

    @cached_property
    def source_bytes(self) -> bytes:
        return self.source_text.encode("utf-8")

    @property
    def parse_failed(self) -> bool:
        return bool(self.diagnostics)


def preorder(root: SyntaxNode) -> Iterator[SyntaxNode]:
    """Yield ``root`` and then every descendant, parents before children."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def ancestors(node: SyntaxNode) -> Iterator[SyntaxNode]:
    """Yield the parent, grandparent, ... up to and including the root."""
    cur = node.parent
    while cur is not None:
        yield cur
        cur = cur.parent


def node_text(file: ParsedFile, node: SyntaxNode) -> str:
    data = file.source_bytes
    if node.span.end_byte > len(data):
        raise ValueError(
            f"{file.path}: span {node.span.start_byte}:{node.span.end_byte} "
            f"exceeds file length {len(data)}")
    return data[node.span.start_byte:node.span.end_byte].decode("utf-8")


def find_all(root: SyntaxNode, kind: NodeKind, aux: str | None = None) -> list[SyntaxNode]:
    return [n for n in preorder(root)
            if n.kind is kind and (aux is None or n.aux == aux)]


def check_tree(file: ParsedFile) -> None:
    """Raise AssertionError if the tree breaks a structural invariant.

    Checks root coverage, parent links, span nesting and sibling order.
    """
    root = file.root
    assert root.kind is NodeKind.FILE and root.parent is None, "bad root"
    assert root.span.start_byte == 0, "root must start at 0"
    assert root.span.end_byte == len(file.source_bytes), "root must cover the file"
    seen = set()
    for node in preorder(root):
        assert id(node) not in seen, f"node visited twice: {node!r}"
        seen.add(id(node))
        if node is not root:
            assert node.kind is not NodeKind.FILE, "nested FILE node"
        prev_end = node.span.start_byte
        for child in node.children:
            assert child.parent is node, f"{child!r} has wrong parent"
            assert node.span.contains(child.span), f"{child!r} escapes {node!r}"
            assert child.span.start_byte >= prev_end, f"{child!r} overlaps sibling"
            prev_end = child.span.end_byte


class TreeBuilder:
    """Turns character offsets into byte spans and links nodes together.

    Frontends lex ``str`` text; spans are stored in UTF-8 bytes.
    """

    def __init__(self, text: str):
        self.text = text
        self._line_starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self._line_starts.append(i + 1)
        if text.isascii():
            self._byte_offsets = None
        else:
            offsets = [0] * (len(text) + 1)
            total = 0
            for i, ch in enumerate(text):
                offsets[i] = total
                total += len(ch.encode("utf-8", "surrogatepass"))
            offsets[len(text)] = total
            self._byte_offsets = offsets

    def line_of(self, char_pos: int) -> int:
        return bisect.bisect_right(self._line_starts, char_pos)

    def byte(self, char_pos: int) -> int:
        if self._byte_offsets is None:
            return char_pos
        return self._byte_offsets[char_pos]

    def node(self, kind: NodeKind, start: int, end: int,
             children: list[SyntaxNode] | None = None, aux: str | None = None) -> SyntaxNode:
        # recovery paths can finish a node before consuming anything; such
        # a node collapses to where the previous token ended
        start = min(start, end)
        span = Span(self.byte(start), self.byte(end), self.line_of(start))
        node = SyntaxNode(kind, span, children or [], None, aux)
        for c in node.children:
            c.parent = node
        return node

    @staticmethod
    def cover_children(root: SyntaxNode) -> None:
        """Widen any node whose span does not cover its children.

        Only error recovery produces such nodes (a placeholder left just
        before a construct that had not consumed a token yet).
        """
        order = list(preorder(root))
        for node in reversed(order):
            ch = node.children
            if not ch:
                continue
            span = node.span
            first = min(ch, key=lambda c: c.span.start_byte).span
            end = max(c.span.end_byte for c in ch)
            if first.start_byte < span.start_byte or end > span.end_byte:
                start = min(span.start_byte, first.start_byte)
                line = first.start_line if first.start_byte < span.start_byte else span.start_line
                node.span = Span(start, max(span.end_byte, end), line)

    def attach(self, root: SyntaxNode, extra: list[SyntaxNode]) -> None:
        """Insert standalone nodes (comments) under the deepest enclosing node."""
        for item in extra:
            parent = root
            while True:
                inner = None
                for c in parent.children:
                    if c.span.start_byte <= item.span.start_byte and item.span.end_byte <= c.span.end_byte \
                            and c.span.start_byte != c.span.end_byte:
                        inner = c
                        break
                if inner is None:
                    break
                parent = inner
            starts = [c.span.start_byte for c in parent.children]
            parent.children.insert(bisect.bisect_right(starts, item.span.start_byte), item)
            item.parent = parent
