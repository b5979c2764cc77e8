"""Hand-written Python 3 frontend.

Indentation-aware lexer plus a recursive-descent parser for statements
and the Python expression grammar.  Syntax errors never abort a file:
the offending logical line becomes an ``OTHER`` node and parsing resumes
at the next line.
"""

from __future__ import annotations

from ..cst import PYTHON, NodeKind, ParsedFile, Span, SyntaxNode, TreeBuilder
from ._tokens import Token, match_op, scan_number

K = NodeKind

KEYWORDS = frozenset("""
    False None True and as assert async await break class continue def del
    elif else except finally for from global if import in is lambda nonlocal
    not or pass raise return try while with yield
""".split())

OPERATORS = (
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>",
    "<=", ">=", "==", "!=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+", "-", "*", "/", "%", "@", "&", "|", "^", "~", "<", ">", "(", ")",
    "[", "]", "{", "}", ",", ":", ";", ".", "=", "!",
)
AUGASSIGN = frozenset({"+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=",
                       "&=", "|=", "^=", "@="})
COMPARISONS = frozenset({"<", ">", "==", ">=", "<=", "!="})
STRING_PREFIXES = frozenset({"r", "u", "b", "f", "br", "rb", "fr", "rf", "t", "tr", "rt"})
CLOSERS = {"(": ")", "[": "]", "{": "}"}

# Binary operator levels between `comparison` and `factor`.
BIN_LEVELS = [("|",), ("^",), ("&",), ("<<", ">>"), ("+", "-"), ("*", "/", "//", "%", "@")]


class _Lexer:
    def __init__(self, text: str, diagnostics: list[str]):
        self.text = text
        self.diags = diagnostics
        self.tokens: list[Token] = []
        self.comments: list[tuple[int, int]] = []

    def error(self, pos: int, msg: str):
        line = self.text.count("\n", 0, pos) + 1
        self.diags.append(f"line {line}: {msg}")

    def emit(self, kind, start, end, ws=False):
        self.tokens.append(Token(kind, self.text[start:end], start, end, False, ws))

    def run(self) -> list[Token]:
        text, n = self.text, len(self.text)
        indents = [0]
        brackets: list[str] = []
        i = 0
        at_line_start = True
        ws = False
        while i < n:
            if at_line_start and not brackets:
                # measure indentation of a new logical line
                col = 0
                j = i
                while j < n and text[j] in " \t\f":
                    col = (col // 8 + 1) * 8 if text[j] == "\t" else col + 1
                    j += 1
                if j >= n:
                    i = j
                    break
                if text[j] in "\r\n" or text[j] == "#" or text.startswith("\\\n", j):
                    # blank or comment-only line: no indentation change
                    if text[j] == "#":
                        end = text.find("\n", j)
                        end = n if end < 0 else end
                        self.comments.append((j, end))
                        j = end
                    if text.startswith("\\\n", j):
                        j += 1
                    if j < n and text[j] == "\r":
                        j += 1
                    if j < n and text[j] == "\n":
                        j += 1
                    i = j
                    continue
                at_line_start = False
                if col > indents[-1]:
                    indents.append(col)
                    self.emit("indent", j, j)
                elif col < indents[-1]:
                    while col < indents[-1]:
                        indents.pop()
                        self.emit("dedent", j, j)
                    if col != indents[-1]:
                        self.error(j, "inconsistent dedent")
                        indents.append(col)
                i = j
                ws = True
            ch = text[i]
            if ch == "\n":
                if not brackets:
                    self.emit("newline", i, i + 1)
                    at_line_start = True
                i += 1
                ws = True
                continue
            if ch in " \t\r\f\v﻿":
                i += 1
                ws = True
                continue
            if ch == "\\" and text.startswith("\n", i + 1):
                i += 2
                ws = True
                continue
            if ch == "\\" and text.startswith("\r\n", i + 1):
                i += 3
                ws = True
                continue
            if ch == "#":
                end = text.find("\n", i)
                end = n if end < 0 else end
                self.comments.append((i, end))
                i = end
                continue
            start = i
            if ch.isalpha() or ch == "_" or ord(ch) > 127 and ch.isidentifier():
                i += 1
                while i < n and (text[i].isalnum() or text[i] == "_"
                                 or ord(text[i]) > 127 and ("a" + text[i]).isidentifier()):
                    i += 1
                word = text[start:i]
                if i < n and text[i] in "'\"" and word.lower() in STRING_PREFIXES:
                    i = self._string(i, fmt="f" in word.lower() or "t" in word.lower(),
                                     raw="r" in word.lower())
                    kind = "string"
                else:
                    kind = "keyword" if word in KEYWORDS else "name"
            elif ch in "'\"":
                i = self._string(i, fmt=False, raw=False)
                kind = "string"
            elif ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
                if ch == ".":
                    i += 1
                    while i < n and (text[i].isdigit() or text[i] == "_"):
                        i += 1
                    if i < n and text[i] in "eE":
                        j = i + 1 + (i + 1 < n and text[i + 1] in "+-")
                        if j < n and text[j].isdigit():
                            i = j
                            while i < n and text[i].isdigit():
                                i += 1
                    if i < n and text[i] in "jJ":
                        i += 1
                    kind = "float"
                else:
                    i, kind = scan_number(text, i, python=True)
            else:
                op = match_op(text, i, OPERATORS)
                if op is None:
                    self.error(i, f"unexpected character {ch!r}")
                    i += 1
                    kind = "error"
                else:
                    i += len(op)
                    kind = "op"
                    if op in CLOSERS:
                        brackets.append(CLOSERS[op])
                    elif op in (")", "]", "}"):
                        if brackets and brackets[-1] == op:
                            brackets.pop()
                        elif op in brackets:
                            while brackets and brackets[-1] != op:
                                brackets.pop()
                            brackets.pop()
                        else:
                            self.error(start, f"unmatched {op!r}")
            self.emit(kind, start, i, ws)
            ws = False
        if brackets:
            self.error(n, "unclosed bracket at end of file")
        if self.tokens and self.tokens[-1].kind not in ("newline", "dedent", "indent"):
            self.emit("newline", n, n)
        for _ in indents[1:]:
            self.emit("dedent", n, n)
        self.emit("eof", n, n, True)
        return self.tokens

    def _string(self, i: int, *, fmt: bool, raw: bool) -> int:
        text, n = self.text, len(self.text)
        q = text[i]
        triple = text.startswith(q * 3, i)
        j = i + 3 if triple else i + 1
        while j < n:
            ch = text[j]
            if ch == "\\" and not (raw and j + 1 < n and text[j + 1] not in (q, "\\", "\n")):
                j += 2
                continue
            if triple and text.startswith(q * 3, j):
                return j + 3
            if not triple and ch == q:
                return j + 1
            if not triple and ch == "\n":
                break
            if fmt and ch == "{":
                if text.startswith("{{", j):
                    j += 2
                    continue
                j = self._fstring_field(j + 1, q, triple)
                continue
            j += 1
        self.error(i, "unterminated string literal")
        return min(j, n)

    def _fstring_field(self, j: int, q: str, triple: bool) -> int:
        """Skip a replacement field; nested strings may reuse the quote."""
        text, n = self.text, len(self.text)
        depth = 1
        while j < n:
            ch = text[j]
            if ch in "'\"":
                if ch == q and not triple and not text.startswith(q * 3, j):
                    # pre-3.12 style: an unescaped quote may end the outer string
                    k = text.find(q, j + 1)
                    nl = text.find("\n", j + 1)
                    if k < 0 or (0 <= nl < k):
                        return j
                j = self._string(j, fmt=False, raw=False)
                continue
            if ch == "\n" and not triple:
                return j
            if ch in "([{":
                depth += 1
            elif ch in ")]}":
                depth -= 1
                if depth == 0:
                    return j + 1
            j += 1
        return n


class _Parser:
    def __init__(self, text: str, tokens: list[Token], builder: TreeBuilder,
                 diagnostics: list[str]):
        self.text = text
        self.toks = tokens
        self.pos = 0
        self.b = builder
        self.diags = diagnostics

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def prev_end(self) -> int:
        # indent/dedent/newline tokens must not stretch a node's span
        k = self.pos - 1
        while k >= 0 and self.toks[k].kind in ("indent", "dedent", "newline"):
            k -= 1
        return self.toks[k].end if k >= 0 else 0

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "keyword") and t.text in texts

    def at_end_of_stmt(self) -> bool:
        return self.tok.kind in ("newline", "eof", "dedent") or self.at(";")

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        self.diags.append(f"line {self.b.line_of(tok.start)}: {msg}")

    def expect(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        self.error(f"expected {text!r}, found {self.tok.text or self.tok.kind!r}")
        return False

    def node(self, kind, start, children=None, aux=None, end=None) -> SyntaxNode:
        return self.b.node(kind, start, self.prev_end() if end is None else end,
                           children, aux)

    def leaf(self, kind, tok: Token, aux=None) -> SyntaxNode:
        return self.b.node(kind, tok.start, tok.end, aux=aux)

    def skip_line(self, msg: str) -> SyntaxNode:
        """Consume the rest of the logical line as an error node."""
        start = self.tok.start
        self.error(msg)
        while self.tok.kind not in ("newline", "eof"):
            if self.tok.kind in ("indent", "dedent"):
                break
            self.advance()
        node = self.node(K.OTHER, start, aux="error")
        if self.tok.kind == "newline":
            self.advance()
        return node

    # -- statements ----------------------------------------------------

    def parse_file(self) -> SyntaxNode:
        body = []
        while self.tok.kind != "eof":
            if self.tok.kind in ("newline", "dedent"):
                self.advance()
                continue
            if self.tok.kind == "indent":
                self.error("unexpected indent")
                self.advance()
                continue
            body.extend(self.statement())
        return self.b.node(K.FILE, 0, len(self.text), body)

    def statement(self) -> list[SyntaxNode]:
        before = self.pos
        t = self.tok
        if t.kind == "keyword":
            handler = {
                "if": self.if_stmt, "while": self.while_stmt, "for": self.for_stmt,
                "def": self.def_stmt, "class": self.class_stmt, "try": self.try_stmt,
                "with": self.with_stmt,
            }.get(t.text)
            if t.text == "async" and self.peek().is_kw("def", "for", "with"):
                self.advance()
                handler = {"def": self.def_stmt, "for": self.for_stmt,
                           "with": self.with_stmt}[self.tok.text]
                return [handler(t.start)]
            if handler is not None:
                return [handler()]
            if t.text in ("elif", "else", "except", "finally"):
                node = self.compound_other(t.text)
                self.error(f"stray {t.text!r}", t)
                return [node]
        elif t.kind == "name" and t.text in ("match", "case") and self._is_soft_compound():
            return [self.compound_other(t.text)]
        elif t.is_op("@"):
            start = self.advance().start
            expr = self.expression()
            node = self.node(K.OTHER, start, [expr], aux="decorator")
            self.end_simple()
            return [node]
        out = self.simple_statements()
        if self.pos == before:
            out.append(self.skip_line(f"unexpected {t.text or t.kind!r}"))
        return out

    def _is_soft_compound(self) -> bool:
        """`match x:` / `case p:` with an indented block following."""
        nxt = self.peek()
        if nxt.kind in ("newline", "eof") or nxt.is_op("=", ".", ",", ")", ":") \
                or (nxt.kind == "op" and nxt.text in AUGASSIGN):
            return False
        k = self.pos
        while k < len(self.toks) and self.toks[k].kind not in ("newline", "eof"):
            k += 1
        return k > 0 and self.toks[k - 1].is_op(":") and \
            k + 1 < len(self.toks) and self.toks[k + 1].kind == "indent"

    def suite(self) -> SyntaxNode:
        """Parse ``: body`` and return the body as a BLOCK."""
        self.expect(":")
        if self.tok.kind == "newline":
            self.advance()
            if self.tok.kind != "indent":
                self.error("expected an indented block")
                pos = self.prev_end()
                return self.b.node(K.BLOCK, pos, pos)
            self.advance()
            body = []
            while self.tok.kind not in ("dedent", "eof"):
                if self.tok.kind == "newline":
                    self.advance()
                    continue
                if self.tok.kind == "indent":
                    self.error("unexpected indent")
                    self.advance()
                    continue
                body.extend(self.statement())
            if self.tok.kind == "dedent":
                self.advance()
            if not body:
                pos = self.prev_end()
                return self.b.node(K.BLOCK, pos, pos)
            return self._block(body)
        if self.tok.kind in ("eof", "dedent"):
            pos = self.prev_end()
            return self.b.node(K.BLOCK, pos, pos)
        start = self.tok.start
        body = self.simple_statements()
        return self.b.node(K.BLOCK, start, self._end_of(body, start), body)

    def _block(self, body: list[SyntaxNode]) -> SyntaxNode:
        node = SyntaxNode(K.BLOCK, _span_over(body[0], body[-1]), body)
        for c in body:
            c.parent = node
        return node

    def _end_of(self, body, start) -> int:
        k = self.pos - 1
        while k >= 0 and self.toks[k].kind in ("newline", "indent", "dedent"):
            k -= 1
        return max(self.toks[k].end, start) if k >= 0 else start

    def if_stmt(self) -> SyntaxNode:
        start = self.advance().start
        children = [self.named_expression(), self.suite()]
        if self.at("elif"):
            children.append(self.if_stmt())
        elif self.at("else"):
            self.advance()
            children.append(self.suite())
        return self.node(K.IF_STMT, start, children)

    def while_stmt(self) -> SyntaxNode:
        start = self.advance().start
        children = [self.named_expression(), self.suite()]
        if self.at("else"):
            self.advance()
            children.append(self.suite())
        return self.node(K.WHILE_STMT, start, children)

    def for_stmt(self, start: int | None = None) -> SyntaxNode:
        t = self.advance()
        start = t.start if start is None else start
        children = [self.target_list()]
        if self.expect("in"):
            children.append(self.expression_list())
        children.append(self.suite())
        if self.at("else"):
            self.advance()
            children.append(self.suite())
        return self.node(K.FOR_STMT, start, children)

    def def_stmt(self, start: int | None = None) -> SyntaxNode:
        t = self.advance()
        start = t.start if start is None else start
        name = None
        if self.tok.kind == "name":
            name = self.advance().text
        if self.at("["):
            self.skip_group()
        children = []
        if self.at("("):
            children.append(self.parameters(")"))
        else:
            self.error("expected parameter list")
        if self.at("->"):
            self.advance()
            children.append(self.expression())
        children.append(self.suite())
        return self.node(K.FUNCTION_DECL, start, children, aux=name)

    def parameters(self, closer: str) -> SyntaxNode:
        start = self.tok.start
        if closer == ")":
            self.advance()
        children = []
        while not self.at(closer) and self.tok.kind not in ("eof", "newline"):
            before = self.pos
            while self.at("*", "**", "/"):
                self.advance()
            if self.tok.kind == "name":
                self.advance()
            if self.at(":") and closer == ")":
                self.advance()
                children.append(self.expression())
            if self.at("="):
                self.advance()
                children.append(self.expression())
            if self.at(","):
                self.advance()
            elif not self.at(closer):
                self.error("bad parameter")
                self.advance()
            if self.pos == before:
                self.advance()
        if closer == ")":
            self.expect(")")
        return self.node(K.OTHER, start, children, aux="params")

    def class_stmt(self) -> SyntaxNode:
        start = self.advance().start
        name = self.advance().text if self.tok.kind == "name" else None
        if self.at("["):
            self.skip_group()
        children = []
        if self.at("("):
            children.extend(self.call_args())
        children.append(self.suite())
        return self.node(K.OTHER, start, children, aux=name or "class")

    def try_stmt(self) -> SyntaxNode:
        start = self.advance().start
        children = [self.suite()]
        while self.at("except", "else", "finally"):
            kw = self.advance().text
            if kw == "except":
                if self.at("*"):
                    self.advance()
                if not self.at(":"):
                    children.append(self.expression())
                    if self.at("as"):
                        self.advance()
                        if self.tok.kind == "name":
                            self.advance()
            children.append(self.suite())
        return self.node(K.OTHER, start, children, aux="try")

    def with_stmt(self, start: int | None = None) -> SyntaxNode:
        t = self.advance()
        start = t.start if start is None else start
        children = []
        while not self.at(":") and not self.at_end_of_stmt():
            before = self.pos
            children.append(self.expression())
            if self.at("as"):
                self.advance()
                children.append(self.target())
            if self.at(","):
                self.advance()
            if self.pos == before:
                break
        children.append(self.suite())
        return self.node(K.OTHER, start, children, aux="with")

    def compound_other(self, label: str) -> SyntaxNode:
        """Generic `keyword header: suite` statement (match/case/stray clauses)."""
        start = self.advance().start
        children = []
        while not self.at(":") and not self.at_end_of_stmt():
            before = self.pos
            children.append(self.expression())
            if self.at(",", "as", "if"):
                self.advance()
            if self.pos == before:
                self.advance()
        if self.at(":"):
            children.append(self.suite())
        elif self.tok.kind == "newline":
            self.advance()
        return self.node(K.OTHER, start, children, aux=label)

    def simple_statements(self) -> list[SyntaxNode]:
        out = []
        while True:
            if self.at_end_of_stmt():
                break
            before = self.pos
            out.append(self.small_statement())
            if self.at(";"):
                self.advance()
                continue
            if not self.at_end_of_stmt():
                out.append(self.skip_line(f"unexpected {self.tok.text!r}"))
                return out
            if self.pos == before:
                break
            break
        if self.tok.kind == "newline":
            self.advance()
        return out

    def end_simple(self):
        if self.tok.kind == "newline":
            self.advance()
        elif not self.at_end_of_stmt():
            self.skip_line(f"unexpected {self.tok.text!r}")

    def small_statement(self) -> SyntaxNode:
        t = self.tok
        start = t.start
        if t.kind == "keyword":
            kw = t.text
            if kw in ("pass", "break", "continue"):
                self.advance()
                return self.leaf(K.OTHER, t, aux=kw)
            if kw in ("import", "from", "global", "nonlocal"):
                self.advance()
                while not self.at_end_of_stmt():
                    self.advance()
                return self.node(K.OTHER, start, aux=kw)
            if kw in ("return", "del"):
                self.advance()
                children = [] if self.at_end_of_stmt() else [self.expression_list(star=True)]
                return self.node(K.OTHER, start, children, aux=kw)
            if kw == "raise":
                self.advance()
                children = []
                if not self.at_end_of_stmt():
                    children.append(self.expression())
                    if self.at("from"):
                        self.advance()
                        children.append(self.expression())
                return self.node(K.OTHER, start, children, aux=kw)
            if kw == "assert":
                self.advance()
                children = [self.expression()]
                if self.at(","):
                    self.advance()
                    children.append(self.expression())
                return self.node(K.OTHER, start, children, aux=kw)
        if t.kind == "name" and t.text == "type" and self.peek().kind == "name":
            self.advance()
            self.advance()
            if self.at("["):
                self.skip_group()
            children = []
            if self.expect("="):
                children.append(self.expression())
            return self.node(K.OTHER, start, children, aux="type")
        first = self.expression_list(star=True)
        if self.at(":"):
            # annotated assignment
            self.advance()
            children = [first, self.expression()]
            if self.at("="):
                self.advance()
                children.append(self.assign_value())
            return self.node(K.OTHER, start, children, aux=":")
        if self.tok.kind == "op" and self.tok.text in AUGASSIGN:
            op = self.advance()
            children = [first, self.leaf(K.OPERATOR_TOKEN, op, op.text), self.assign_value()]
            return self.node(K.OTHER, start, children, aux=op.text)
        if self.at("="):
            children = [first]
            while self.at("="):
                op = self.advance()
                children.append(self.leaf(K.OPERATOR_TOKEN, op, "="))
                children.append(self.assign_value())
            return self.node(K.OTHER, start, children, aux="=")
        return first

    def assign_value(self) -> SyntaxNode:
        if self.at("yield"):
            return self.yield_expr()
        return self.expression_list(star=True)

    # -- expressions ---------------------------------------------------

    def skip_group(self):
        closer = CLOSERS[self.advance().text]
        depth = 1
        while self.tok.kind != "eof" and depth:
            t = self.advance()
            if t.kind == "op":
                if t.text in CLOSERS:
                    depth += 1
                elif t.text in (")", "]", "}"):
                    depth -= 1
        if depth:
            self.error(f"expected {closer!r}")

    def expression_list(self, star: bool = False) -> SyntaxNode:
        """One expression, or a tuple display if commas follow."""
        start = self.tok.start
        first = self.star_or_expr() if star else self.expression()
        if not self.at(","):
            return first
        items = [first]
        while self.at(","):
            self.advance()
            if self.at_end_of_stmt() or self.at("=", ":", ")", "]", "}") or \
                    (self.tok.kind == "op" and self.tok.text in AUGASSIGN):
                break
            items.append(self.star_or_expr() if star else self.expression())
        return self.node(K.OTHER, start, items, aux="tuple")

    def star_or_expr(self) -> SyntaxNode:
        if self.at("*"):
            t = self.advance()
            operand = self.bitor()
            return self.node(K.UNARY_EXPR, t.start,
                             [self.leaf(K.OPERATOR_TOKEN, t, "*"), operand], aux="*")
        return self.expression()

    def target(self) -> SyntaxNode:
        return self.star_or_bitor()

    def star_or_bitor(self) -> SyntaxNode:
        if self.at("*"):
            t = self.advance()
            operand = self.bitor()
            return self.node(K.UNARY_EXPR, t.start,
                             [self.leaf(K.OPERATOR_TOKEN, t, "*"), operand], aux="*")
        return self.bitor()

    def target_list(self) -> SyntaxNode:
        start = self.tok.start
        first = self.star_or_bitor()
        if not self.at(","):
            return first
        items = [first]
        while self.at(","):
            self.advance()
            if self.at("in"):
                break
            items.append(self.star_or_bitor())
        return self.node(K.OTHER, start, items, aux="tuple")

    def named_expression(self) -> SyntaxNode:
        start = self.tok.start
        if self.tok.kind == "name" and self.peek().is_op(":="):
            name = self.advance()
            self.advance()
            value = self.expression()
            return self.node(K.OTHER, start, [self.leaf(K.IDENTIFIER, name, name.text), value],
                             aux=":=")
        return self.expression()

    def expression(self) -> SyntaxNode:
        if self.at("lambda"):
            return self.lambda_expr()
        if self.at("yield"):
            return self.yield_expr()
        start = self.tok.start
        body = self.or_test()
        if self.at("if") and self._ternary_ahead():
            self.advance()
            cond = self.or_test()
            children = [body, cond]
            if self.expect("else"):
                children.append(self.expression())
            return self.node(K.OTHER, start, children, aux="ternary")
        return body

    def _ternary_ahead(self) -> bool:
        # `x if c else y` vs. the `if` of a comprehension: look for a matching else
        depth = 0
        for t in self.toks[self.pos + 1:]:
            if t.kind in ("newline", "eof"):
                return False
            if t.kind == "op":
                if t.text in CLOSERS:
                    depth += 1
                elif t.text in (")", "]", "}"):
                    if depth == 0:
                        return False
                    depth -= 1
                elif t.text in (",", ":") and depth == 0:
                    return False
            elif t.kind == "keyword" and depth == 0:
                if t.text == "else":
                    return True
                if t.text in ("for", "if"):
                    return False
        return False

    def yield_expr(self) -> SyntaxNode:
        start = self.advance().start
        children = []
        if self.at("from"):
            self.advance()
            children.append(self.expression())
        elif not self.at_end_of_stmt() and not self.at(")", "]", "}", "=", ","):
            children.append(self.expression_list(star=True))
        return self.node(K.OTHER, start, children, aux="yield")

    def lambda_expr(self) -> SyntaxNode:
        start = self.advance().start
        children = []
        if not self.at(":"):
            children.append(self.parameters(":"))
        self.expect(":")
        children.append(self.expression())
        return self.node(K.LAMBDA, start, children)

    def or_test(self) -> SyntaxNode:
        return self._bool_chain("or", self.and_test)

    def and_test(self) -> SyntaxNode:
        return self._bool_chain("and", self.not_test)

    def _bool_chain(self, op: str, sub) -> SyntaxNode:
        start = self.tok.start
        lhs = sub()
        while self.at(op):
            t = self.advance()
            rhs = sub()
            lhs = self.node(K.BINARY_EXPR, start,
                            [lhs, self.leaf(K.OPERATOR_TOKEN, t, op), rhs], aux=op)
        return lhs

    def not_test(self) -> SyntaxNode:
        if self.at("not"):
            t = self.advance()
            operand = self.not_test()
            return self.node(K.UNARY_EXPR, t.start,
                             [self.leaf(K.OPERATOR_TOKEN, t, "not"), operand], aux="not")
        return self.comparison()

    def comp_op(self) -> str | None:
        t = self.tok
        if t.kind == "op" and t.text in COMPARISONS:
            return t.text
        if t.is_kw("in"):
            return "in"
        if t.is_kw("not") and self.peek().is_kw("in"):
            return "not in"
        if t.is_kw("is"):
            return "is not" if self.peek().is_kw("not") else "is"
        return None

    def comparison(self) -> SyntaxNode:
        start = self.tok.start
        first = self.bitor()
        parts = [first]
        ops = []
        while (op := self.comp_op()) is not None:
            t0 = self.advance()
            if op in ("not in", "is not"):
                self.advance()
            opnode = self.b.node(K.OPERATOR_TOKEN, t0.start, self.prev_end(), aux=op)
            ops.append(op)
            parts.append(opnode)
            parts.append(self.bitor())
        if not ops:
            return first
        if len(ops) == 1:
            return self.node(K.BINARY_EXPR, start, parts, aux=ops[0])
        return self.node(K.OTHER, start, parts, aux="compare")

    def bitor(self, level: int = 0) -> SyntaxNode:
        if level == len(BIN_LEVELS):
            return self.factor()
        start = self.tok.start
        lhs = self.bitor(level + 1)
        ops = BIN_LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            t = self.advance()
            rhs = self.bitor(level + 1)
            lhs = self.node(K.BINARY_EXPR, start,
                            [lhs, self.leaf(K.OPERATOR_TOKEN, t, t.text), rhs], aux=t.text)
        return lhs

    def factor(self) -> SyntaxNode:
        t = self.tok
        if t.is_op("-", "+", "~"):
            self.advance()
            operand = self.factor()
            return self.node(K.UNARY_EXPR, t.start,
                             [self.leaf(K.OPERATOR_TOKEN, t, t.text), operand], aux=t.text)
        return self.power()

    def power(self) -> SyntaxNode:
        start = self.tok.start
        if self.at("await"):
            t = self.advance()
            operand = self.primary()
            base = self.node(K.UNARY_EXPR, start,
                             [self.leaf(K.OPERATOR_TOKEN, t, "await"), operand], aux="await")
        else:
            base = self.primary()
        if self.at("**"):
            t = self.advance()
            exp = self.factor()
            return self.node(K.BINARY_EXPR, start,
                             [base, self.leaf(K.OPERATOR_TOKEN, t, "**"), exp], aux="**")
        return base

    def primary(self) -> SyntaxNode:
        start = self.tok.start
        expr = self.atom()
        while True:
            if self.at("."):
                self.advance()
                if self.tok.kind in ("name", "keyword"):
                    name = self.advance().text
                else:
                    self.error("expected attribute name")
                    name = None
                if self.at("("):
                    args = self.call_args()
                    expr = self.node(K.MEMBER_CALL, start, [expr] + args, aux=name)
                else:
                    expr = self.node(K.OTHER, start, [expr], aux=name)
            elif self.at("("):
                args = self.call_args()
                aux = expr.aux if expr.kind is K.IDENTIFIER else None
                expr = self.node(K.CALL_EXPR, start, [expr] + args, aux=aux)
            elif self.at("["):
                self.advance()
                items = self.subscript_items()
                self.expect("]")
                expr = self.node(K.OTHER, start, [expr] + items, aux="subscript")
            else:
                return expr

    def call_args(self) -> list[SyntaxNode]:
        self.advance()  # (
        args = []
        while not self.at(")") and self.tok.kind != "eof":
            before = self.pos
            if self.at("*", "**"):
                t = self.advance()
                operand = self.expression()
                args.append(self.node(K.UNARY_EXPR, t.start,
                                      [self.leaf(K.OPERATOR_TOKEN, t, t.text), operand], aux=t.text))
            elif self.tok.kind == "name" and self.peek().is_op("="):
                self.advance()
                self.advance()
                args.append(self.expression())
            else:
                arg = self.named_expression()
                if self.at("for", "async"):
                    arg = self.comprehension(arg.span, [arg])
                args.append(arg)
            if self.at(","):
                self.advance()
            elif not self.at(")"):
                self._recover_in_group(")")
            if self.pos == before:
                self.advance()
        self.expect(")")
        return args

    def _recover_in_group(self, closer: str):
        self.error(f"unexpected {self.tok.text or self.tok.kind!r} before {closer!r}")
        depth = 0
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "op":
                if t.text in CLOSERS:
                    depth += 1
                elif t.text in (")", "]", "}"):
                    if depth == 0:
                        return
                    depth -= 1
                elif t.text == "," and depth == 0:
                    self.advance()
                    return
            if t.kind in ("newline", "indent", "dedent"):
                return
            self.advance()

    def subscript_items(self) -> list[SyntaxNode]:
        items = []
        while not self.at("]") and self.tok.kind != "eof":
            before = self.pos
            if self.at(":"):
                self.advance()
                continue
            items.append(self.star_or_expr())
            if self.at(",", ":"):
                self.advance()
            elif not self.at("]"):
                self._recover_in_group("]")
            if self.pos == before:
                self.advance()
        return items

    def comprehension(self, first_span, items: list[SyntaxNode]) -> SyntaxNode:
        """Parse `for ... in ... [if ...]` clauses after the element ``items``."""
        start_byte = first_span.start_byte
        children = list(items)
        while self.at("for", "async"):
            if self.at("async"):
                self.advance()
            self.advance()
            children.append(self.target_list())
            if self.expect("in"):
                children.append(self.or_test())
            while self.at("if"):
                self.advance()
                children.append(self.or_test())
        end = self.prev_end()
        span = Span(start_byte, self.b.byte(end), first_span.start_line)
        node = SyntaxNode(K.OTHER, span, children, None, "comprehension")
        for c in children:
            c.parent = node
        return node

    def display(self, opener: str) -> SyntaxNode:
        start = self.advance().start
        closer = CLOSERS[opener]
        items: list[SyntaxNode] = []
        kind_aux = {"(": "tuple", "[": "list", "{": "set"}[opener]
        saw_comma = False
        while not self.at(closer) and self.tok.kind != "eof":
            before = self.pos
            if opener == "{" and self.at("**"):
                self.advance()
                items.append(self.bitor())
                kind_aux = "dict"
            else:
                item = self.star_or_expr() if not self.at("yield") else self.yield_expr()
                if opener == "{" and self.at(":"):
                    self.advance()
                    kind_aux = "dict"
                    value = self.expression()
                    if self.at("for", "async"):
                        items.append(self.comprehension(item.span, [item, value]))
                        continue
                    items.extend([item, value])
                elif self.at("for", "async"):
                    items.append(self.comprehension(item.span, [item]))
                    kind_aux = "comprehension"
                    continue
                else:
                    if item.kind is K.IDENTIFIER and self.at(":="):
                        self.advance()
                        value = self.expression()
                        item = self._walrus(item, value)
                    items.append(item)
            if self.at(","):
                saw_comma = True
                self.advance()
            elif not self.at(closer):
                self._recover_in_group(closer)
            if self.pos == before:
                self.advance()
        self.expect(closer)
        if opener == "(" and len(items) == 1 and not saw_comma and kind_aux == "tuple":
            return self.node(K.PAREN_EXPR, start, items)
        if opener == "(" and kind_aux == "comprehension":
            kind_aux = "generator"
        return self.node(K.OTHER, start, items, aux=kind_aux)

    def _walrus(self, name: SyntaxNode, value: SyntaxNode) -> SyntaxNode:
        node = SyntaxNode(K.OTHER, _span_over(name, value), [name, value], None, ":=")
        name.parent = value.parent = node
        return node

    def atom(self) -> SyntaxNode:
        t = self.tok
        if t.kind == "name":
            self.advance()
            return self.leaf(K.IDENTIFIER, t, t.text)
        if t.kind == "keyword":
            if t.text in ("True", "False"):
                self.advance()
                return self.leaf(K.BOOL_LITERAL, t, t.text)
            if t.text == "None":
                self.advance()
                return self.leaf(K.OTHER, t, "None")
            if t.text == "lambda":
                return self.lambda_expr()
        if t.kind == "int":
            self.advance()
            return self.leaf(K.INT_LITERAL, t, t.text)
        if t.kind == "float":
            self.advance()
            return self.leaf(K.OTHER, t, "float")
        if t.kind == "string":
            self.advance()
            while self.tok.kind == "string":
                self.advance()
            return self.node(K.STRING_LITERAL, t.start)
        if t.is_op("(", "[", "{"):
            return self.display(t.text)
        if t.is_op("..."):
            self.advance()
            return self.leaf(K.OTHER, t, "...")
        self.error(f"unexpected {t.text or t.kind!r} in expression")
        if t.kind in ("newline", "eof", "indent", "dedent") or t.is_op(")", "]", "}", ",", ":", ";", "="):
            pos = self.prev_end()
            return self.b.node(K.OTHER, pos, pos, aux="missing")
        self.advance()
        return self.leaf(K.OTHER, t, "error")


def _span_over(first: SyntaxNode, last: SyntaxNode) -> Span:
    return Span(first.span.start_byte, last.span.end_byte, first.span.start_line)


def parse_python(source_text: str, path: str) -> ParsedFile:
    diagnostics: list[str] = []
    builder = TreeBuilder(source_text)
    lexer = _Lexer(source_text, diagnostics)
    tokens = lexer.run()
    parser = _Parser(source_text, tokens, builder, diagnostics)
    root = parser.parse_file()
    comments = [builder.node(K.COMMENT, s, e) for s, e in lexer.comments]
    builder.cover_children(root)
    builder.attach(root, comments)
    return ParsedFile(path, PYTHON, root, source_text, diagnostics)
