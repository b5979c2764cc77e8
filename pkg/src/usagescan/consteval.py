"""Three-valued constant evaluation of expression subtrees.

The evaluator is deliberately sound rather than complete: it answers
``TRUE``/``FALSE`` only when the value is forced by literals alone.
Identifiers, calls, strings and floats are all ``UNKNOWN``; integer
arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cst import KOTLIN, PYTHON, NodeKind, ParsedFile, SyntaxNode

K = NodeKind


class Truth(Enum):
    TRUE = "TrueVal"
    FALSE = "FalseVal"
    UNKNOWN = "Unknown"
    NUM = "Num"


@dataclass(frozen=True, slots=True)
class EvalValue:
    tag: Truth
    num: int | None = None

    def __post_init__(self):
        if (self.tag is Truth.NUM) != (self.num is not None):
            raise ValueError("only NUM values carry a numeric payload")

    @property
    def is_true(self) -> bool:
        return self.tag is Truth.TRUE

    @property
    def is_false(self) -> bool:
        return self.tag is Truth.FALSE

    @property
    def is_unknown(self) -> bool:
        return self.tag is Truth.UNKNOWN

    @property
    def is_bool(self) -> bool:
        return self.tag is Truth.TRUE or self.tag is Truth.FALSE

    @staticmethod
    def of_bool(b: bool) -> EvalValue:
        return TRUE if b else FALSE

    @staticmethod
    def number(n: int) -> EvalValue:
        v = _SMALL.get(n)
        return v if v is not None else EvalValue(Truth.NUM, n)

    def __repr__(self):
        return f"EvalValue({self.num})" if self.tag is Truth.NUM else self.tag.value


TRUE = EvalValue(Truth.TRUE)
FALSE = EvalValue(Truth.FALSE)
UNKNOWN = EvalValue(Truth.UNKNOWN)
_SMALL = {n: EvalValue(Truth.NUM, n) for n in range(-256, 257)}


class NotAnExpression(TypeError):
    """Raised when evaluation is asked of a statement-level node."""


_EXPRESSION_KINDS = frozenset({
    K.BINARY_EXPR, K.INFIX_CALL, K.CALL_EXPR, K.MEMBER_CALL, K.PAREN_EXPR,
    K.UNARY_EXPR, K.LAMBDA, K.INT_LITERAL, K.BOOL_LITERAL, K.STRING_LITERAL,
    K.IDENTIFIER, K.OTHER,
})
# `if` and `when` are expressions in Kotlin
_KOTLIN_EXTRA = frozenset({K.IF_STMT, K.WHEN_STMT})

_COMPARE = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _floordiv(a, b):
    return None if b == 0 else a // b


def _floormod(a, b):
    return None if b == 0 else a % b


def _truncdiv(a, b):
    if b == 0:
        return None
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _truncrem(a, b):
    if b == 0:
        return None
    return a - b * _truncdiv(a, b)


_ARITH = {
    PYTHON: {"+": int.__add__, "-": int.__sub__, "*": int.__mul__,
             "//": _floordiv, "%": _floormod},
    KOTLIN: {"+": int.__add__, "-": int.__sub__, "*": int.__mul__,
             "/": _truncdiv, "%": _truncrem},
}
# Kotlin Int is 32-bit and wraps; anything outside stays Unknown
_KT_INT_MIN, _KT_INT_MAX = -2**31, 2**31 - 1
_AND = {PYTHON: "and", KOTLIN: "&&"}
_OR = {PYTHON: "or", KOTLIN: "||"}
_NOT = {PYTHON: "not", KOTLIN: "!"}


def _parse_int(text: str, language: str) -> int | None:
    t = text.replace("_", "").lower()
    if language == KOTLIN:
        if t.endswith("l") or t.endswith("u"):
            # Long/unsigned literals change the static type; stay conservative
            return None
    try:
        if t.startswith(("0x", "0b", "0o")):
            n = int(t, 0)
        elif len(t) > 1 and t.startswith("0"):
            return None
        else:
            n = int(t)
    except ValueError:
        return None
    if language == KOTLIN and n > _KT_INT_MAX:
        return None  # an out-of-range literal is a Long
    return n


_T, _F, _U, _N = Truth.TRUE, Truth.FALSE, Truth.UNKNOWN, Truth.NUM
_PAREN, _UNARY, _BINARY, _OTHER = K.PAREN_EXPR, K.UNARY_EXPR, K.BINARY_EXPR, K.OTHER
_INT, _BOOL, _OPTOK, _COMMENT = K.INT_LITERAL, K.BOOL_LITERAL, K.OPERATOR_TOKEN, K.COMMENT


class _Evaluator:
    def __init__(self, language: str):
        self.lang = language
        self.arith = _ARITH.get(language, {})
        self.and_op = _AND.get(language)
        self.or_op = _OR.get(language)
        self.not_op = _NOT.get(language)
        self.python = language == PYTHON
        self.kinds = _EXPRESSION_KINDS | _KOTLIN_EXTRA if language == KOTLIN else _EXPRESSION_KINDS
        self.literals: dict[str, EvalValue] = {}

    def check(self, node: SyntaxNode):
        if node.kind not in self.kinds:
            raise NotAnExpression(f"cannot evaluate a {node.kind.value} node")

    def as_int(self, v: EvalValue) -> int | None:
        """Numeric view of a value; Python booleans are 0/1."""
        tag = v.tag
        if tag is _N:
            return v.num
        if self.python:
            if tag is _T:
                return 1
            if tag is _F:
                return 0
        return None

    def literal(self, text: str) -> EvalValue:
        v = self.literals.get(text)
        if v is None:
            n = _parse_int(text, self.lang)
            v = UNKNOWN if n is None else EvalValue.number(n)
            if len(self.literals) < 4096:
                self.literals[text] = v
        return v

    def truth(self, node: SyntaxNode) -> EvalValue:
        """Truthiness of ``node`` in a boolean context."""
        kind = node.kind
        if kind is _PAREN:
            inner = _operands(node)
            return self.truth(inner[0]) if len(inner) == 1 else UNKNOWN
        aux = node.aux
        if kind is _UNARY and aux == self.not_op:
            return _negate(self.truth(_operands(node)[0]))
        if kind is _BINARY and (aux == self.and_op or aux == self.or_op):
            # Kotlin also needs the operand type check done in binary()
            return self.kleene(node) if self.python else self.binary(node)
        v = self.value(node)
        if v.tag is _N:
            if self.python:
                return TRUE if v.num else FALSE
            return UNKNOWN
        return v

    def kleene(self, node: SyntaxNode) -> EvalValue:
        """Three-valued and/or: a false conjunct or true disjunct decides."""
        parts = _operands(node)
        if len(parts) != 2:
            return UNKNOWN
        lhs, rhs = parts
        if node.aux == self.and_op:
            a = self.truth(lhs).tag
            if a is _F:
                return FALSE
            b = self.truth(rhs).tag
            if b is _F:
                return FALSE
            return TRUE if a is _T and b is _T else UNKNOWN
        a = self.truth(lhs).tag
        if a is _T:
            return TRUE
        b = self.truth(rhs).tag
        if b is _T:
            return TRUE
        return FALSE if a is _F and b is _F else UNKNOWN

    def value(self, node: SyntaxNode) -> EvalValue:
        kind = node.kind
        if kind is _INT:
            return self.literal(node.aux or "")
        if kind is _BINARY:
            return self.binary(node)
        if kind is _BOOL:
            return TRUE if node.aux in ("True", "true") else FALSE
        if kind is _PAREN:
            inner = _operands(node)
            return self.value(inner[0]) if len(inner) == 1 else UNKNOWN
        if kind is _UNARY:
            return self.unary(node)
        if kind is _OTHER and self.python and node.aux == "compare":
            return self.chain(node)
        if kind in self.kinds:
            return UNKNOWN
        raise NotAnExpression(f"cannot evaluate a {kind.value} node")

    def unary(self, node: SyntaxNode) -> EvalValue:
        op = node.aux
        operand = _operands(node)
        if len(operand) != 1:
            return UNKNOWN
        if op == self.not_op:
            if self.python:
                return _negate(self.truth(operand[0]))
            v = self.value(operand[0])
            return _negate(v) if v.tag is _T or v.tag is _F else UNKNOWN
        if op in ("-", "+", "~"):
            n = self.as_int(self.value(operand[0]))
            if n is None or (op == "~" and not self.python):
                return UNKNOWN
            return self.number(-n if op == "-" else (n if op == "+" else ~n))
        return UNKNOWN

    def number(self, n: int) -> EvalValue:
        if not self.python and not _KT_INT_MIN <= n <= _KT_INT_MAX:
            return UNKNOWN
        return EvalValue.number(n)

    def binary(self, node: SyntaxNode) -> EvalValue:
        op = node.aux
        parts = _operands(node)
        if len(parts) != 2:
            return UNKNOWN
        lhs, rhs = parts
        if op == self.and_op or op == self.or_op:
            if not self.python:
                v = self.kleene(node)
                # both operands must be Boolean-typed in Kotlin
                if v.tag is not _U and all(self.value(p).tag is not _N for p in parts):
                    return v
                return UNKNOWN
            a = self.truth(lhs).tag
            if a is _U:
                return UNKNOWN
            if (op == self.and_op) == (a is _F):
                return self.value(lhs)
            return self.value(rhs)
        cmp = _COMPARE.get(op)
        if cmp is not None:
            a, b = self.value(lhs), self.value(rhs)
            if self.python:
                x, y = self.as_int(a), self.as_int(b)
                if x is None or y is None:
                    return UNKNOWN
                return TRUE if cmp(x, y) else FALSE
            if a.tag is _N and b.tag is _N:
                return TRUE if cmp(a.num, b.num) else FALSE
            if a.tag is not _N and a.tag is not _U and b.tag is not _N and b.tag is not _U:
                # Boolean is Comparable: false < true
                return TRUE if cmp(a.tag is _T, b.tag is _T) else FALSE
            return UNKNOWN
        fn = self.arith.get(op)
        if fn is None:
            return UNKNOWN
        a, b = self.value(lhs), self.value(rhs)
        if self.python:
            x, y = self.as_int(a), self.as_int(b)
        else:
            x, y = a.num, b.num
        if x is None or y is None:
            return UNKNOWN
        result = fn(x, y)
        return UNKNOWN if result is None else self.number(result)

    def chain(self, node: SyntaxNode) -> EvalValue:
        # a < b < c  ==  (a < b) and (b < c), each operand evaluated once
        items = node.children
        operands = [self.as_int(self.value(c)) for c in items
                    if c.kind is not _OPTOK and c.kind is not _COMMENT]
        ops = [c.aux for c in items if c.kind is _OPTOK]
        if len(ops) != len(operands) - 1:
            return UNKNOWN
        result = TRUE
        for op, x, y in zip(ops, operands, operands[1:]):
            if op not in _COMPARE or x is None or y is None:
                result = UNKNOWN
                continue
            if not _COMPARE[op](x, y):
                return FALSE
        return result


def _operands(node: SyntaxNode) -> list[SyntaxNode]:
    ch = node.children
    # fast path for the usual [lhs, op, rhs] / [op, operand] / [x] shapes
    n = len(ch)
    if n == 3 and ch[1].kind is _OPTOK:
        return [ch[0], ch[2]]
    if n == 2 and ch[0].kind is _OPTOK:
        return [ch[1]]
    if n == 1 and ch[0].kind is not _OPTOK and ch[0].kind is not _COMMENT:
        return ch
    return node.significant_children()


_TY_INT, _BOOLEAN, _ILL = "Int", "Boolean", "ill-typed"
_KT_ARITH = frozenset({"+", "-", "*", "/", "%"})
_KT_ORDER = frozenset({"<", "<=", ">", ">="})


def _kotlin_type(node: SyntaxNode) -> str | None:
    """Static type of a Kotlin expression over literals: Int, Boolean,
    ill-typed, or None when it depends on something not evaluated."""
    kind = node.kind
    if kind is _INT:
        return _TY_INT if _parse_int(node.aux or "", KOTLIN) is not None else None
    if kind is _BOOL:
        return _BOOLEAN
    if kind is _PAREN:
        inner = _operands(node)
        return _kotlin_type(inner[0]) if len(inner) == 1 else None
    if kind is _UNARY:
        parts = _operands(node)
        t = _kotlin_type(parts[0]) if len(parts) == 1 else None
        if t == _ILL:
            return _ILL
        want = _BOOLEAN if node.aux == "!" else _TY_INT
        if t is not None and t != want:
            return _ILL
        return want if node.aux in ("!", "-", "+") else None
    if kind is not _BINARY:
        return None
    parts = _operands(node)
    if len(parts) != 2:
        return None
    a, b = (_kotlin_type(p) for p in parts)
    if _ILL in (a, b):
        return _ILL
    op = node.aux
    if op in ("&&", "||"):
        return _BOOLEAN if a in (None, _BOOLEAN) and b in (None, _BOOLEAN) else _ILL
    if op in ("==", "!="):
        return _ILL if a is not None and b is not None and a != b else _BOOLEAN
    if op in _KT_ORDER:
        return _ILL if _BOOLEAN in (a, b) and a != b else _BOOLEAN
    if op in _KT_ARITH:
        if _BOOLEAN in (a, b):
            return _ILL
        return _TY_INT if a == b == _TY_INT else None
    return None


def _negate(v: EvalValue) -> EvalValue:
    tag = v.tag
    if tag is _T:
        return FALSE
    if tag is _F:
        return TRUE
    return UNKNOWN


_evaluators: dict[str, _Evaluator] = {}


def _evaluator(language: str) -> _Evaluator:
    ev = _evaluators.get(language)
    if ev is None:
        ev = _evaluators[language] = _Evaluator(language)
    return ev


def eval_expr(node: SyntaxNode, file: ParsedFile) -> EvalValue:
    """Constant value of an expression node."""
    ev = _evaluator(file.language)
    ev.check(node)
    if file.language == KOTLIN and _kotlin_type(node) == _ILL:
        return UNKNOWN
    return ev.value(node)


def eval_bool(node: SyntaxNode, file: ParsedFile) -> EvalValue:
    """Constant truth value of ``node`` used as a condition.

    Python applies its truthiness rules to integers; Kotlin has no
    implicit numeric truthiness, so a bare integer is ``UNKNOWN``, as is
    any Kotlin expression that mixes Int and Boolean operands.
    """
    ev = _evaluator(file.language)
    ev.check(node)
    if file.language == KOTLIN and _kotlin_type(node) == _ILL:
        return UNKNOWN
    return ev.truth(node)
