"""Hand-written Kotlin frontend.

Covers the subset of Kotlin that the shipped analyzers rely on: loops,
``if``/``when``, functions, classes, lambdas and the full expression
precedence ladder (ranges and named infix calls included).  Anything the
parser does not understand degrades to an ``OTHER`` node plus a
diagnostic; a file is never rejected outright.
"""

from __future__ import annotations

from ..cst import KOTLIN, NodeKind, ParsedFile, SyntaxNode, TreeBuilder
from ._tokens import Token, match_op, scan_number

K = NodeKind

HARD_KEYWORDS = frozenset("""
    as break class continue do else false for fun if in interface is null
    object package return super this throw true try typealias typeof val var
    when while
""".split())

MODIFIERS = frozenset("""
    public private protected internal open abstract final override sealed
    data enum annotation companion inner inline noinline crossinline
    reified tailrec operator infix external suspend const lateinit vararg
    value expect actual fun_interface
""".split())

OPERATORS = (
    "!==", "===", "..<", "?.", "?:", "!!", "::", "->", "==", "!=", "<=", ">=",
    "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "..",
    "+", "-", "*", "/", "%", "=", "<", ">", "!", "?", ".", ",", ";", ":",
    "(", ")", "[", "]", "{", "}", "@", "&", "|", "^", "~", "#", "$",
)

ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%="})

# Binary operator table: text -> precedence level (higher binds tighter).
BINARY_LEVELS = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3, "===": 3, "!==": 3,
    "<": 4, ">": 4, "<=": 4, ">=": 4,
    "in": 5, "!in": 5, "is": 5, "!is": 5,
    "?:": 6,
    # 7: named infix functions
    "..": 8, "..<": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
    "as": 11, "as?": 11,
}
INFIX_LEVEL = 7
# Operators that may start a continuation line.
NL_CONTINUATION = frozenset({"||", "&&", "?:", "as", "as?"})

# Tokens allowed inside a lambda parameter list or type argument list.
_TYPEISH_OPS = frozenset({",", ":", "(", ")", "<", ">", "?", ".", "*", "->", "@"})


class _Lexer:
    def __init__(self, text: str, diagnostics: list[str]):
        self.text = text
        self.diags = diagnostics
        self.tokens: list[Token] = []
        self.comments: list[tuple[int, int]] = []

    def error(self, pos: int, msg: str):
        line = self.text.count("\n", 0, pos) + 1
        self.diags.append(f"line {line}: {msg}")

    def run(self) -> list[Token]:
        text, n = self.text, len(self.text)
        i = 0
        nl = False
        ws = False
        if text.startswith("#!"):
            end = text.find("\n")
            end = n if end < 0 else end
            self.comments.append((0, end))
            i = end
        while i < n:
            ch = text[i]
            if ch == "\n":
                nl = ws = True
                i += 1
                continue
            if ch in " \t\r\f\v﻿":
                ws = True
                i += 1
                continue
            if text.startswith("//", i):
                end = text.find("\n", i)
                end = n if end < 0 else end
                self.comments.append((i, end))
                i = end
                ws = True
                continue
            if text.startswith("/*", i):
                end = self._block_comment(i)
                self.comments.append((i, end))
                nl = nl or "\n" in text[i:end]
                i = end
                ws = True
                continue
            start = i
            if ch == '"':
                i = self._string(i)
                kind = "string"
            elif ch == "'":
                i = self._char(i)
                kind = "char"
            elif ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()
                                  and not self._after_operand()):
                if ch == ".":
                    i += 1
                    while i < n and (text[i].isdigit() or text[i] == "_"):
                        i += 1
                    if i < n and text[i] in "fF":
                        i += 1
                    kind = "float"
                else:
                    i, kind = scan_number(text, i, python=False)
            elif ch.isalpha() or ch == "_":
                i += 1
                while i < n and (text[i].isalnum() or text[i] == "_"):
                    i += 1
                kind = "keyword" if text[start:i] in HARD_KEYWORDS else "name"
            elif ch == "`":
                end = text.find("`", i + 1)
                nl_at = text.find("\n", i + 1)
                if end < 0 or (0 <= nl_at < end):
                    self.error(i, "unterminated backtick identifier")
                    end = (nl_at if nl_at >= 0 else n) - 1
                i = end + 1
                kind = "name"
            else:
                op = match_op(text, i, OPERATORS)
                if op is None:
                    self.error(i, f"unexpected character {ch!r}")
                    i += 1
                    kind = "error"
                else:
                    i += len(op)
                    kind = "op"
            self.tokens.append(Token(kind, text[start:i], start, i, nl, ws))
            nl = ws = False
        self.tokens.append(Token("eof", "", n, n, True, True))
        return self.tokens

    def _after_operand(self) -> bool:
        if not self.tokens:
            return False
        last = self.tokens[-1]
        return last.kind in ("name", "int", "float", "string") or last.is_op(")", "]", ".")

    def _block_comment(self, i: int) -> int:
        text, n = self.text, len(self.text)
        depth = 0
        while i < n:
            if text.startswith("/*", i):
                depth += 1
                i += 2
            elif text.startswith("*/", i):
                depth -= 1
                i += 2
                if depth == 0:
                    return i
            else:
                i += 1
        self.error(n, "unterminated block comment")
        return n

    def _char(self, i: int) -> int:
        text, n = self.text, len(self.text)
        j = i + 1
        while j < n and text[j] != "'" and text[j] != "\n":
            j += 2 if text[j] == "\\" else 1
        if j < n and text[j] == "'":
            return j + 1
        self.error(i, "unterminated character literal")
        return min(j, n)

    def _string(self, i: int) -> int:
        """Return the end offset of the string literal starting at ``i``."""
        text, n = self.text, len(self.text)
        raw = text.startswith('"""', i)
        j = i + 3 if raw else i + 1
        while j < n:
            ch = text[j]
            if raw and text.startswith('"""', j):
                j += 3
                while j < n and text[j] == '"':
                    j += 1
                return j
            if not raw and ch == '"':
                return j + 1
            if not raw and ch == "\n":
                break
            if not raw and ch == "\\":
                j += 2
                continue
            if ch == "$" and j + 1 < n and text[j + 1] == "{":
                j = self._template(j + 2)
                continue
            j += 1
        self.error(i, "unterminated string literal")
        return min(j, n)

    def _template(self, j: int) -> int:
        """Skip a ``${...}`` template body; ``j`` is just past the brace."""
        text, n = self.text, len(self.text)
        depth = 1
        while j < n:
            ch = text[j]
            if ch == '"':
                j = self._string(j)
                continue
            if ch == "'":
                j = self._char(j)
                continue
            if text.startswith("/*", j):
                j = self._block_comment(j)
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
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
        # True when newlines are insignificant (inside parentheses/brackets).
        self.nl_stack = [False]
        # >0 while a '{' must not be taken as a trailing lambda (class bodies)
        self.no_lambda = 0

    # -- token helpers -------------------------------------------------

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
        return self.toks[self.pos - 1].end if self.pos else 0

    def at_eof(self) -> bool:
        return self.tok.kind == "eof"

    def nl(self) -> bool:
        """True if a significant newline precedes the current token."""
        return self.tok.nl_before and not self.nl_stack[-1]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        self.diags.append(f"line {self.b.line_of(tok.start)}: {msg}")

    def expect_op(self, text: str) -> bool:
        if self.tok.is_op(text):
            self.advance()
            return True
        self.error(f"expected {text!r}, found {self.tok.text or 'end of file'!r}")
        return False

    def empty(self, kind, aux=None) -> SyntaxNode:
        """Zero-width placeholder right after the last consumed token."""
        pos = self.prev_end()
        return self.b.node(kind, pos, pos, aux=aux)

    def node(self, kind, start, children=None, aux=None, end=None) -> SyntaxNode:
        return self.b.node(kind, start, self.prev_end() if end is None else end,
                           children, aux)

    def skip_balanced(self) -> None:
        """Consume one token, or a whole bracketed group if it opens one."""
        pairs = {"(": ")", "[": "]", "{": "}"}
        t = self.advance()
        if not t.is_op(*pairs):
            return
        stack = [pairs[t.text]]
        while stack and not self.at_eof():
            t = self.advance()
            if t.kind == "op":
                if t.text in pairs:
                    stack.append(pairs[t.text])
                elif t.text == stack[-1]:
                    stack.pop()
                elif t.text in (")", "]", "}"):
                    # mismatched closer; give up on this group
                    self.pos -= 1
                    break
        if stack:
            self.error("unbalanced brackets")

    def error_node(self, msg: str, stop_ops=(";", "}")) -> SyntaxNode:
        """Skip to the end of the current statement and wrap it as OTHER."""
        start = self.tok.start
        self.error(msg)
        first = True
        while not self.at_eof():
            if not first and (self.nl() or self.tok.is_op(*stop_ops)):
                break
            if self.tok.is_op(")", "]", "}") and first:
                self.advance()
                break
            self.skip_balanced()
            first = False
        return self.node(K.OTHER, start, aux="error")

    def push_nl(self, ignore: bool):
        self.nl_stack.append(ignore)

    def pop_nl(self):
        self.nl_stack.pop()

    # -- file & statements ---------------------------------------------

    def parse_file(self) -> SyntaxNode:
        children = self.statements(top=True)
        return self.b.node(K.FILE, 0, len(self.text), children)

    def statements(self, top: bool = False, class_body: bool = False) -> list[SyntaxNode]:
        out: list[SyntaxNode] = []
        self.push_nl(False)
        while not self.at_eof():
            t = self.tok
            if t.is_op(";") or (class_body and t.is_op(",")):
                self.advance()
                continue
            if t.is_op("}"):
                if top:
                    out.append(self.error_node("unmatched '}'"))
                    continue
                break
            before = self.pos
            stmt = self.statement()
            if stmt is not None:
                out.append(stmt)
            if self.pos == before:
                out.append(self.error_node(f"unexpected {self.tok.text!r}"))
                continue
            t = self.tok
            if not (t.kind == "eof" or t.is_op(";", "}") or self.nl()
                    or (class_body and t.is_op(","))):
                out.append(self.error_node(f"unexpected {t.text!r} after statement"))
        self.pop_nl()
        return out

    def skip_annotations_and_modifiers(self) -> None:
        while True:
            t = self.tok
            if t.is_op("@") and self.peek().kind in ("name", "keyword"):
                self.advance()
                self.advance()
                if self.tok.is_op(":") and not self.tok.ws_before:
                    self.advance()
                    if self.tok.kind == "name":
                        self.advance()
                while self.tok.is_op(".") and self.peek().kind == "name":
                    self.advance()
                    self.advance()
                if self.tok.is_op("<"):
                    self.type_args()
                if self.tok.is_op("(") and not self.tok.ws_before:
                    self.skip_balanced()
                continue
            if t.kind == "name" and t.text in MODIFIERS:
                nxt = self.peek()
                if nxt.kind in ("name", "keyword") or nxt.is_op("@"):
                    self.advance()
                    continue
            break

    def statement(self) -> SyntaxNode | None:
        start = self.tok.start
        self.skip_annotations_and_modifiers()
        t = self.tok
        if t.kind == "keyword" and t.text == "object" and self.peek().is_op("{"):
            return self.class_decl(start)
        if t.kind == "keyword":
            kw = t.text
            if kw == "package":
                self.advance()
                while not self.at_eof() and not self.nl() and not self.tok.is_op(";"):
                    self.advance()
                return self.node(K.OTHER, start, aux=kw)
            if kw == "fun" and not self.peek().is_op("("):
                return self.function(start)
            if kw in ("class", "interface") or (kw == "object" and self.peek().kind == "name"):
                return self.class_decl(start)
            if kw == "typealias":
                self.advance()
                while not self.at_eof() and not self.nl() and not self.tok.is_op(";", "}"):
                    self.advance()
                return self.node(K.OTHER, start, aux="typealias")
            if kw in ("val", "var"):
                return self.property(start)
            if kw in ("for", "while", "do"):
                return self.loop(start)
        elif t.kind == "name":
            if t.text == "import" and self.peek().kind == "name" and not self.peek().nl_before:
                self.advance()
                while not self.at_eof() and not self.nl() and not self.tok.is_op(";"):
                    self.advance()
                return self.node(K.OTHER, start, aux="import")
            if t.text == "init" and self.peek().is_op("{"):
                self.advance()
                return self.node(K.OTHER, start, [self.block()], aux="init")
            if t.text == "constructor" and self.peek().is_op("("):
                return self.secondary_constructor(start)
            if self.peek().is_op("@") and not self.peek().ws_before \
                    and self.peek(2).is_kw("for", "while", "do"):
                self.advance()
                self.advance()
                return self.loop(start)
        if self.tok.start > start and (self.at_eof() or self.tok.is_op(";", "}")):
            # annotations or modifiers with nothing after them
            return self.node(K.OTHER, start, aux="modifiers")
        expr = self.expression()
        if self.tok.kind == "op" and self.tok.text in ASSIGN_OPS and not self.nl():
            op = self.advance()
            opnode = self.b.node(K.OPERATOR_TOKEN, op.start, op.end, aux=op.text)
            rhs = self.expression()
            return self.node(K.OTHER, start, [expr, opnode, rhs], aux=op.text)
        return expr

    def block(self) -> SyntaxNode:
        start = self.tok.start
        if not self.expect_op("{"):
            return self.empty(K.BLOCK)
        body = self.statements()
        self.expect_op("}")
        return self.node(K.BLOCK, start, body)

    def control_body(self) -> SyntaxNode:
        """Body of a loop or branch: a braced block or a single statement."""
        if self.tok.is_op("{"):
            return self.block()
        if self.tok.is_op(";"):
            t = self.advance()
            return self.b.node(K.BLOCK, t.start, t.end)
        self.push_nl(False)
        try:
            stmt = self.statement()
        finally:
            self.pop_nl()
        return stmt

    def loop(self, start: int) -> SyntaxNode:
        kw = self.advance().text
        if kw == "do":
            body = self.control_body() if not self.tok.is_kw("while") else \
                self.empty(K.BLOCK)
            children = [body]
            if self.tok.is_kw("while"):
                self.advance()
                children.append(self.paren_condition())
            else:
                self.error("expected 'while' after do-body")
            return self.node(K.DO_WHILE_STMT, start, children)
        if kw == "while":
            cond = self.paren_condition()
            return self.node(K.WHILE_STMT, start, [cond, self.control_body()])
        # for
        children = []
        if self.expect_op("("):
            self.push_nl(True)
            self.skip_annotations_and_modifiers()
            var_start = self.tok.start
            if self.tok.is_op("("):
                self.skip_balanced()
                children.append(self.node(K.OTHER, var_start, aux="destructuring"))
            elif self.tok.kind == "name":
                t = self.advance()
                children.append(self.b.node(K.IDENTIFIER, t.start, t.end, aux=t.text))
            else:
                self.error("expected loop variable")
            if self.tok.is_op(":"):
                self.advance()
                self.skip_type()
            if self.tok.is_kw("in"):
                self.advance()
                children.append(self.expression())
            else:
                self.error("expected 'in' in for loop")
            while not self.at_eof() and not self.tok.is_op(")"):
                children.append(self.error_node("unexpected token in for header", (")",)))
            self.pop_nl()
            self.expect_op(")")
        children.append(self.control_body())
        return self.node(K.FOR_STMT, start, children)

    def paren_condition(self) -> SyntaxNode:
        start = self.tok.start
        if not self.expect_op("("):
            return self.empty(K.OTHER, "error")
        self.push_nl(True)
        cond = self.expression()
        while not self.at_eof() and not self.tok.is_op(")"):
            self.error_node("unexpected token in condition", (")",))
        self.pop_nl()
        self.expect_op(")")
        return cond

    # -- declarations --------------------------------------------------

    def function(self, start: int) -> SyntaxNode:
        self.advance()  # fun
        if self.tok.is_op("<"):
            self.type_args()
        name = None
        # receiver type and name: take the last name before '('
        while not self.at_eof() and not self.tok.is_op("(", "{", "=") and not self.nl():
            t = self.tok
            if t.kind == "name":
                name = t.text
                self.advance()
            elif t.is_op("<"):
                self.type_args()
            elif t.is_op(".", "?"):
                self.advance()
            else:
                break
        children = []
        if self.tok.is_op("("):
            children.append(self.params())
        else:
            self.error("expected parameter list")
        if self.tok.is_op(":"):
            self.advance()
            self.skip_type()
        if self.tok.kind == "name" and self.tok.text == "where":
            self.advance()
            while not self.at_eof() and not self.tok.is_op("{", "=") and not self.nl():
                self.advance()
        if self.tok.is_op("{"):
            children.append(self.block())
        elif self.tok.is_op("="):
            self.advance()
            children.append(self.expression())
        return self.node(K.FUNCTION_DECL, start, children, aux=name)

    def params(self) -> SyntaxNode:
        """Parenthesized parameter list; default values become children."""
        start = self.tok.start
        self.advance()
        self.push_nl(True)
        children = []
        while not self.at_eof() and not self.tok.is_op(")"):
            before = self.pos
            self.skip_annotations_and_modifiers()
            if self.tok.is_kw("val", "var"):
                self.advance()
            if self.tok.kind == "name":
                self.advance()
            if self.tok.is_op(":"):
                self.advance()
                self.skip_type()
            if self.tok.is_op("="):
                self.advance()
                children.append(self.expression())
            if self.tok.is_op(","):
                self.advance()
            elif not self.tok.is_op(")"):
                children.append(self.error_node("bad parameter", (",", ")")))
                if self.tok.is_op(","):
                    self.advance()
            if self.pos == before:
                self.advance()
        self.pop_nl()
        self.expect_op(")")
        return self.node(K.OTHER, start, children, aux="params")

    def secondary_constructor(self, start: int) -> SyntaxNode:
        self.advance()
        children = [self.params()]
        if self.tok.is_op(":"):
            self.advance()
            if self.tok.is_kw("this", "super"):
                self.advance()
            if self.tok.is_op("("):
                children.append(self.call_args_node())
        if self.tok.is_op("{"):
            children.append(self.block())
        return self.node(K.OTHER, start, children, aux="constructor")

    def class_decl(self, start: int) -> SyntaxNode:
        self.advance()  # class / interface / object
        name = None
        if self.tok.kind == "name":
            name = self.advance().text
        if self.tok.is_op("<"):
            self.type_args()
        children = []
        self.skip_annotations_and_modifiers()
        if self.tok.kind == "name" and self.tok.text == "constructor":
            self.advance()
        if self.tok.is_op("("):
            children.append(self.params())
        if self.tok.is_op(":"):
            self.advance()
            children.extend(self.supertypes())
        if self.tok.kind == "name" and self.tok.text == "where":
            while not self.at_eof() and not self.tok.is_op("{") and not self.nl():
                self.advance()
        if self.tok.is_op("{"):
            bstart = self.tok.start
            self.advance()
            body = self.statements(class_body=True)
            self.expect_op("}")
            children.append(self.node(K.BLOCK, bstart, body))
        return self.node(K.OTHER, start, children, aux=name or "class")

    def supertypes(self) -> list[SyntaxNode]:
        out = []
        while True:
            self.skip_annotations_and_modifiers()
            self.skip_type()
            if self.tok.is_op("(") and not self.tok.ws_before:
                out.append(self.call_args_node(lambdas=False))
            if self.tok.kind == "name" and self.tok.text == "by":
                self.advance()
                self.no_lambda += 1
                out.append(self.expression())
                self.no_lambda -= 1
            if self.tok.is_op(","):
                self.advance()
                continue
            return out

    def property(self, start: int) -> SyntaxNode:
        kw = self.advance().text
        if self.tok.is_op("<"):
            self.type_args()
        children = []
        if self.tok.is_op("("):
            self.skip_balanced()
        else:
            # receiver.name or name
            while self.tok.kind == "name":
                t = self.advance()
                if self.tok.is_op(".") and self.peek().kind == "name":
                    self.advance()
                    continue
                children.append(self.b.node(K.IDENTIFIER, t.start, t.end, aux=t.text))
                break
        if self.tok.is_op(":"):
            self.advance()
            self.skip_type()
        if self.tok.kind == "name" and self.tok.text == "by" and not self.nl():
            self.advance()
            children.append(self.expression())
        elif self.tok.is_op("=") and not self.nl():
            self.advance()
            children.append(self.expression())
        return self.node(K.OTHER, start, children, aux=kw)

    # -- types ---------------------------------------------------------

    def type_args(self) -> None:
        """Skip a ``<...>`` list; the current token is ``<``."""
        depth = 0
        while not self.at_eof():
            t = self.advance()
            if t.is_op("<"):
                depth += 1
            elif t.is_op(">"):
                depth -= 1
                if depth == 0:
                    return
            elif t.is_op("(", "["):
                self.pos -= 1
                self.skip_balanced()
            elif t.is_op(";", "{", "}", "=") or (t.kind == "op" and t.text in ("&&", "||")):
                self.pos -= 1
                self.error("unterminated type argument list")
                return

    def skip_type(self) -> None:
        self.skip_annotations_and_modifiers()
        t = self.tok
        if t.is_op("("):
            self.skip_balanced()
        elif t.kind == "name" or t.is_op("*"):
            self.advance()
            while True:
                if self.tok.is_op("<"):
                    self.type_args()
                if self.tok.is_op(".") and self.peek().kind == "name":
                    self.advance()
                    self.advance()
                    continue
                if self.tok.is_op(".") and self.peek().is_op("("):
                    # receiver function type: T.() -> R
                    self.advance()
                    self.skip_balanced()
                break
        else:
            return
        while self.tok.is_op("?"):
            self.advance()
        if self.tok.is_op("->"):
            self.advance()
            self.skip_type()

    def looks_like_type_args(self) -> bool:
        """Decide whether ``<`` at the cursor opens generic call arguments."""
        depth = 0
        i = self.pos
        while i < len(self.toks):
            t = self.toks[i]
            if t.is_op("<"):
                depth += 1
            elif t.is_op(">"):
                depth -= 1
                if depth == 0:
                    nxt = self.toks[i + 1] if i + 1 < len(self.toks) else t
                    return (nxt.is_op("(", "::", ".") and not nxt.nl_before) \
                        or (nxt.is_op("{") and not nxt.nl_before)
            elif t.kind == "name" or t.is_kw("in") or (t.kind == "op" and t.text in _TYPEISH_OPS):
                pass
            else:
                return False
            i += 1
        return False

    # -- expressions ---------------------------------------------------

    def expression(self) -> SyntaxNode:
        return self.binary(1)

    def binary_op(self) -> tuple[int, str, int] | None:
        """Return (level, operator text, token count) for a binary operator here."""
        t = self.tok
        if t.kind == "op":
            if t.text == "!" and not self.peek().ws_before and self.peek().is_kw("in", "is"):
                op = "!" + self.peek().text
                return BINARY_LEVELS[op], op, 2
            if t.text in BINARY_LEVELS:
                return BINARY_LEVELS[t.text], t.text, 1
            return None
        if t.kind == "keyword":
            if t.text == "as":
                if self.peek().is_op("?") and not self.peek().ws_before:
                    return BINARY_LEVELS["as?"], "as?", 2
                return BINARY_LEVELS["as"], "as", 1
            if t.text in ("in", "is"):
                return BINARY_LEVELS[t.text], t.text, 1
            return None
        if t.kind == "name":
            return INFIX_LEVEL, t.text, 1
        return None

    def binary(self, min_level: int) -> SyntaxNode:
        start = self.tok.start
        lhs = self.unary()
        while True:
            info = self.binary_op()
            if info is None:
                break
            level, op, ntok = info
            if level < min_level:
                break
            if self.nl() and op not in NL_CONTINUATION:
                break
            op_start = self.tok.start
            for _ in range(ntok):
                self.advance()
            opnode = self.b.node(K.OPERATOR_TOKEN, op_start, self.prev_end(), aux=op)
            if op in ("is", "!is", "as", "as?"):
                self.skip_type()
                lhs = self.node(K.OTHER, start, [lhs, opnode], aux=op)
                continue
            rhs = self.binary(level + 1)
            kind = K.INFIX_CALL if level == INFIX_LEVEL else K.BINARY_EXPR
            lhs = self.node(kind, start, [lhs, opnode, rhs], aux=op)
        return lhs

    def unary(self) -> SyntaxNode:
        t = self.tok
        start = t.start
        if t.is_op("-", "+", "!", "++", "--"):
            self.advance()
            opnode = self.b.node(K.OPERATOR_TOKEN, t.start, t.end, aux=t.text)
            operand = self.unary()
            return self.node(K.UNARY_EXPR, start, [opnode, operand], aux=t.text)
        if t.kind == "name" and self.peek().is_op("@") and not self.peek().ws_before:
            # labelled expression: lbl@ { ... }
            self.advance()
            self.advance()
            inner = self.unary()
            return self.node(K.OTHER, start, [inner], aux="label")
        if t.is_op("@"):
            before = self.pos
            self.skip_annotations_and_modifiers()
            if self.pos == before:
                self.error("stray '@'")
                self.advance()
                return self.b.node(K.OTHER, t.start, t.end, aux="error")
            return self.unary()
        return self.postfix()

    def postfix(self) -> SyntaxNode:
        start = self.tok.start
        expr = self.primary()
        while True:
            t = self.tok
            if t.is_op(".", "?."):
                nxt = self.peek()
                if nxt.kind in ("name", "keyword"):
                    self.advance()
                    name = self.advance()
                    if self.tok.is_op("<") and not self.tok.ws_before and self.looks_like_type_args():
                        self.type_args()
                    if self.tok.is_op("(") and not self.tok.nl_before or \
                            self.tok.is_op("{") and not self.tok.nl_before and not self.no_lambda:
                        args = self.call_suffix()
                        expr = self.node(K.MEMBER_CALL, start, [expr] + args, aux=name.text)
                    else:
                        expr = self.node(K.OTHER, start, [expr], aux=name.text)
                    continue
                break
            if t.nl_before and not self.nl_stack[-1]:
                break
            if t.is_op("(") or (t.is_op("{") and self.accepts_trailing_lambda(expr)):
                args = self.call_suffix()
                aux = expr.aux if expr.kind is K.IDENTIFIER else None
                expr = self.node(K.CALL_EXPR, start, [expr] + args, aux=aux)
            elif t.is_op("["):
                self.advance()
                self.push_nl(True)
                items = self.expr_list("]")
                self.pop_nl()
                self.expect_op("]")
                expr = self.node(K.OTHER, start, [expr] + items, aux="index")
            elif t.is_op("<") and expr.kind is K.IDENTIFIER and not t.ws_before \
                    and self.looks_like_type_args():
                self.type_args()
            elif t.is_op("::"):
                self.advance()
                if self.tok.kind in ("name", "keyword"):
                    self.advance()
                expr = self.node(K.OTHER, start, [expr], aux="::")
            elif t.is_op("!!", "++", "--") and not t.ws_before:
                self.advance()
                opnode = self.b.node(K.OPERATOR_TOKEN, t.start, t.end, aux=t.text)
                expr = self.node(K.UNARY_EXPR, start, [expr, opnode], aux=t.text)
            else:
                break
        return expr

    def accepts_trailing_lambda(self, expr: SyntaxNode) -> bool:
        if self.no_lambda:
            return False
        return expr.kind in (K.IDENTIFIER, K.CALL_EXPR, K.MEMBER_CALL) or \
            (expr.kind is K.OTHER and expr.aux in ("this", "super"))

    def call_suffix(self, lambdas: bool = True) -> list[SyntaxNode]:
        args = []
        if self.tok.is_op("("):
            self.advance()
            self.push_nl(True)
            args = self.expr_list(")", named=True)
            self.pop_nl()
            self.expect_op(")")
        if lambdas and not self.no_lambda and self.tok.is_op("{") and not self.tok.nl_before:
            args.append(self.lambda_())
        return args

    def call_args_node(self, lambdas: bool = True) -> SyntaxNode:
        start = self.tok.start
        args = self.call_suffix(lambdas)
        return self.node(K.OTHER, start, args, aux="args")

    def expr_list(self, closer: str, named: bool = False) -> list[SyntaxNode]:
        out = []
        while not self.at_eof() and not self.tok.is_op(closer):
            before = self.pos
            if named and self.tok.kind == "name" and self.peek().is_op("="):
                self.advance()
                self.advance()
            if self.tok.is_op("*"):
                self.advance()
            out.append(self.expression())
            if self.tok.is_op(","):
                self.advance()
            elif not self.tok.is_op(closer):
                out.append(self.error_node("unexpected token in argument list", (",", closer)))
                if self.tok.is_op(","):
                    self.advance()
            if self.pos == before:
                self.advance()
        return out

    def lambda_(self) -> SyntaxNode:
        start = self.tok.start
        self.advance()  # {
        self.push_nl(False)
        # parameter list: scan to '->' over parameter-like tokens only
        i = self.pos
        depth = 0
        arrow = None
        while i < len(self.toks):
            t = self.toks[i]
            if t.is_op("->") and depth == 0:
                arrow = i
                break
            if t.is_op("(", "<"):
                depth += 1
            elif t.is_op(")", ">"):
                depth -= 1
            elif not (t.kind == "name" or (t.kind == "op" and t.text in _TYPEISH_OPS)):
                break
            i += 1
        children = []
        if arrow is not None:
            pstart = self.tok.start
            self.pos = arrow
            if self.pos > 0 and self.toks[self.pos - 1].start >= pstart:
                children.append(self.node(K.OTHER, pstart, aux="params"))
            self.advance()
        self.pop_nl()
        children.extend(self.statements())
        self.expect_op("}")
        return self.node(K.LAMBDA, start, children)

    def primary(self) -> SyntaxNode:
        t = self.tok
        start = t.start
        if t.kind == "int":
            self.advance()
            return self.b.node(K.INT_LITERAL, t.start, t.end, aux=t.text)
        if t.kind in ("float", "uint", "long"):
            self.advance()
            if t.kind == "float":
                return self.b.node(K.OTHER, t.start, t.end, aux="float")
            return self.b.node(K.INT_LITERAL, t.start, t.end, aux=t.text)
        if t.kind == "string":
            self.advance()
            return self.b.node(K.STRING_LITERAL, t.start, t.end)
        if t.kind == "char":
            self.advance()
            return self.b.node(K.OTHER, t.start, t.end, aux="char")
        if t.kind == "name":
            self.advance()
            return self.b.node(K.IDENTIFIER, t.start, t.end, aux=t.text)
        if t.kind == "keyword":
            kw = t.text
            if kw in ("true", "false"):
                self.advance()
                return self.b.node(K.BOOL_LITERAL, t.start, t.end, aux=kw)
            if kw == "null":
                self.advance()
                return self.b.node(K.OTHER, t.start, t.end, aux="null")
            if kw in ("this", "super"):
                self.advance()
                if self.tok.is_op("@") and not self.tok.ws_before:
                    self.advance()
                    if self.tok.kind == "name":
                        self.advance()
                if kw == "super" and self.tok.is_op("<"):
                    self.type_args()
                return self.node(K.OTHER, start, aux=kw)
            if kw == "if":
                return self.if_expr()
            if kw == "when":
                return self.when_expr()
            if kw == "try":
                return self.try_expr()
            if kw == "object":
                self.advance()
                children = []
                if self.tok.is_op(":"):
                    self.advance()
                    children.extend(self.supertypes())
                if self.tok.is_op("{"):
                    bstart = self.tok.start
                    self.advance()
                    body = self.statements(class_body=True)
                    self.expect_op("}")
                    children.append(self.node(K.BLOCK, bstart, body))
                return self.node(K.OTHER, start, children, aux="object")
            if kw == "fun":
                # anonymous function
                self.advance()
                children = [self.params()]
                if self.tok.is_op(":"):
                    self.advance()
                    self.skip_type()
                if self.tok.is_op("{"):
                    children.append(self.block())
                elif self.tok.is_op("="):
                    self.advance()
                    children.append(self.expression())
                return self.node(K.FUNCTION_DECL, start, children, aux="<anonymous>")
            if kw in ("return", "throw", "break", "continue"):
                self.advance()
                if self.tok.is_op("@") and not self.tok.ws_before:
                    self.advance()
                    if self.tok.kind == "name":
                        self.advance()
                children = []
                if kw in ("return", "throw") and not self.nl() and self.starts_expression():
                    children.append(self.expression())
                return self.node(K.OTHER, start, children, aux=kw)
            if kw in ("val", "var"):
                # `when (val x = f())` subject binding
                return self.property(start)
        if t.is_op("("):
            self.advance()
            self.push_nl(True)
            inner = self.expression()
            while not self.at_eof() and not self.tok.is_op(")"):
                self.error_node("unexpected token in parentheses", (")",))
            self.pop_nl()
            self.expect_op(")")
            return self.node(K.PAREN_EXPR, start, [inner])
        if t.is_op("{"):
            return self.lambda_()
        if t.is_op("::"):
            self.advance()
            if self.tok.kind in ("name", "keyword"):
                self.advance()
            return self.node(K.OTHER, start, aux="::")
        if t.is_op("["):
            self.advance()
            self.push_nl(True)
            items = self.expr_list("]")
            self.pop_nl()
            self.expect_op("]")
            return self.node(K.OTHER, start, items, aux="collection")
        self.error(f"unexpected {t.text or 'end of file'!r} in expression")
        if t.kind == "eof" or t.is_op(")", "]", "}", ";", ","):
            return self.empty(K.OTHER, "missing")
        self.advance()
        return self.b.node(K.OTHER, t.start, t.end, aux="error")

    def starts_expression(self) -> bool:
        t = self.tok
        if t.kind == "eof":
            return False
        if t.kind == "op":
            return t.text in ("(", "{", "-", "+", "!", "++", "--", "::", "@", "[")
        if t.kind == "keyword":
            return t.text not in ("else", "in", "is", "as", "catch", "finally")
        return True

    def if_expr(self) -> SyntaxNode:
        start = self.advance().start
        cond = self.paren_condition()
        children = [cond]
        if self.tok.is_kw("else"):
            children.append(self.empty(K.BLOCK))
        else:
            children.append(self.control_body())
        save = self.pos
        if self.tok.is_op(";") and self.peek().is_kw("else"):
            self.advance()
        if self.tok.is_kw("else"):
            self.advance()
            children.append(self.control_body())
        else:
            self.pos = save
        return self.node(K.IF_STMT, start, children)

    def when_expr(self) -> SyntaxNode:
        start = self.advance().start
        children = []
        if self.tok.is_op("("):
            self.advance()
            self.push_nl(True)
            children.append(self.expression())
            self.pop_nl()
            self.expect_op(")")
        if not self.expect_op("{"):
            return self.node(K.WHEN_STMT, start, children)
        self.push_nl(False)
        while not self.at_eof() and not self.tok.is_op("}"):
            if self.tok.is_op(";"):
                self.advance()
                continue
            before = self.pos
            children.append(self.when_entry())
            if self.pos == before:
                children.append(self.error_node("bad when entry"))
        self.pop_nl()
        self.expect_op("}")
        return self.node(K.WHEN_STMT, start, children)

    def when_entry(self) -> SyntaxNode:
        start = self.tok.start
        children = []
        if self.tok.is_kw("else"):
            self.advance()
        else:
            self.push_nl(True)
            while not self.at_eof():
                t = self.tok
                if t.is_kw("in"):
                    self.advance()
                    children.append(self.expression())
                elif t.is_op("!") and self.peek().is_kw("in"):
                    self.advance()
                    self.advance()
                    children.append(self.expression())
                elif t.is_kw("is") or (t.is_op("!") and self.peek().is_kw("is")):
                    if t.is_op("!"):
                        self.advance()
                    self.advance()
                    self.skip_type()
                else:
                    children.append(self.expression())
                if self.tok.is_op(","):
                    self.advance()
                    continue
                break
            self.pop_nl()
        if self.tok.kind == "keyword" and self.tok.text == "if":
            # guard condition
            self.advance()
            children.append(self.expression())
        if self.expect_op("->"):
            children.append(self.control_body())
        else:
            children.append(self.error_node("expected '->' in when entry"))
        return self.node(K.OTHER, start, children, aux="when_entry")

    def try_expr(self) -> SyntaxNode:
        start = self.advance().start
        children = [self.block()]
        while self.tok.kind == "name" and self.tok.text == "catch":
            self.advance()
            if self.tok.is_op("("):
                self.skip_balanced()
            children.append(self.block())
        if self.tok.kind == "name" and self.tok.text == "finally":
            self.advance()
            children.append(self.block())
        return self.node(K.OTHER, start, children, aux="try")


def parse_kotlin(source_text: str, path: str) -> ParsedFile:
    diagnostics: list[str] = []
    builder = TreeBuilder(source_text)
    lexer = _Lexer(source_text, diagnostics)
    tokens = lexer.run()
    parser = _Parser(source_text, tokens, builder, diagnostics)
    root = parser.parse_file()
    comments = [builder.node(K.COMMENT, s, e) for s, e in lexer.comments]
    builder.cover_children(root)
    builder.attach(root, comments)
    return ParsedFile(path, KOTLIN, root, source_text, diagnostics)
