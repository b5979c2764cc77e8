"""Independent reference interpreter for constant-expression tests.

Expressions are tuple trees: a leaf is a Python value or the free
variable ``X``; ``("not", t)`` and ``(op, lhs, rhs)`` are operators.
Python semantics come straight from Python itself; Kotlin semantics are
a small typed interpreter where any type error means "no constant".
"""

import operator

from usagescan.cst import KOTLIN, PYTHON, NodeKind, Span, SyntaxNode

X = "x"
LEAVES = (0, 1, 2, 4, True, False, X)
BINARY = ("+", "-", "*", "==", "!=", "<", "<=", ">", ">=", "and", "or")

# values the free variable ranges over: the operand set plus two more
# integers so sign and odd/even both vary
DOMAIN = (0, 1, 2, 4, -1, 3, True, False)
# adds values of other types, for which some operators raise
EXTENDED_DOMAIN = DOMAIN + ("", "a", [], [0], None)

_PY_OPS = {
    "+": operator.add, "-": operator.sub, "*": operator.mul,
    "==": operator.eq, "!=": operator.ne, "<": operator.lt,
    "<=": operator.le, ">": operator.gt, ">=": operator.ge,
}


class Raised:
    """Marker outcome for an expression that raises at runtime."""

    def __repr__(self):
        return "Raised"


RAISED = Raised()


def py_apply(op, a, b):
    if a is RAISED:
        return RAISED
    if op == "and":
        return a and b
    if op == "or":
        return a or b
    if b is RAISED:
        return RAISED
    try:
        return _PY_OPS[op](a, b)
    except TypeError:
        return RAISED


def py_not(a):
    return RAISED if a is RAISED else (not a)


def py_eval(tree, x=None):
    if isinstance(tree, tuple):
        if tree[0] == "not":
            return py_not(py_eval(tree[1], x))
        op, lhs, rhs = tree
        a = py_eval(lhs, x)
        if op in ("and", "or") and a is not RAISED:
            # short circuit: the right side is not evaluated
            if (op == "and" and not a) or (op == "or" and a):
                return a
        return py_apply(op, a, py_eval(rhs, x))
    return x if isinstance(tree, str) else tree


def is_closed(tree):
    if isinstance(tree, tuple):
        return all(is_closed(t) for t in tree[1:])
    return not isinstance(tree, str)


def truth_outcome(v):
    return RAISED if v is RAISED else bool(v)


def py_truth_outcomes(tree, domain=DOMAIN):
    """Set of truth outcomes over every value of the free variable."""
    return {truth_outcome(py_eval(tree, x)) for x in domain}


class KotlinTypeError(Exception):
    pass


_KT_INT_OPS = {"+": operator.add, "-": operator.sub, "*": operator.mul,
               "<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def kt_eval(tree):
    """Kotlin value of a closed tree; raises KotlinTypeError when ill-typed."""
    if not isinstance(tree, tuple):
        if isinstance(tree, str):
            raise KotlinTypeError("free variable")
        return tree
    if tree[0] == "not":
        v = kt_eval(tree[1])
        if not isinstance(v, bool):
            raise KotlinTypeError("! on Int")
        return not v
    op, lhs, rhs = tree
    a, b = kt_eval(lhs), kt_eval(rhs)
    both_bool = isinstance(a, bool) and isinstance(b, bool)
    both_int = not isinstance(a, bool) and not isinstance(b, bool)
    if op in ("and", "or"):
        if not both_bool:
            raise KotlinTypeError(f"{op} needs Booleans")
        return (a and b) if op == "and" else (a or b)
    if op in ("==", "!="):
        if not (both_bool or both_int):
            raise KotlinTypeError("equality across types")
        return (a == b) if op == "==" else (a != b)
    if op in ("<", "<=", ">", ">="):
        # Boolean is Comparable in Kotlin: false < true
        if not (both_bool or both_int):
            raise KotlinTypeError("ordering across types")
        return _KT_INT_OPS[op](a, b)
    if not both_int:
        raise KotlinTypeError(f"{op} needs Ints")
    return _KT_INT_OPS[op](a, b)


def trees(depth):
    """All trees of depth <= ``depth`` (a leaf has depth 1)."""
    if depth == 1:
        return list(LEAVES)
    sub = trees(depth - 1)
    out = list(LEAVES)
    out += [("not", t) for t in sub]
    out += [(op, a, b) for op in BINARY for a in sub for b in sub]
    return out


_SPAN = Span(0, 0, 1)
_KOTLIN_OP = {"and": "&&", "or": "||", "not": "!"}


def _leaf_node(value, language):
    if isinstance(value, bool):
        text = ("True" if value else "False") if language == PYTHON else ("true" if value else "false")
        return SyntaxNode(NodeKind.BOOL_LITERAL, _SPAN, [], None, text)
    if isinstance(value, str):
        return SyntaxNode(NodeKind.IDENTIFIER, _SPAN, [], None, X)
    return SyntaxNode(NodeKind.INT_LITERAL, _SPAN, [], None, str(value))


def op_text(op, language):
    return _KOTLIN_OP.get(op, op) if language == KOTLIN else op


def op_token(op, language):
    return SyntaxNode(NodeKind.OPERATOR_TOKEN, _SPAN, [], None, op_text(op, language))


def to_node(tree, language=PYTHON):
    """Build CST nodes directly, bypassing the parser."""
    if not isinstance(tree, tuple):
        return _leaf_node(tree, language)
    if tree[0] == "not":
        return SyntaxNode(NodeKind.UNARY_EXPR, _SPAN,
                          [op_token("not", language), to_node(tree[1], language)],
                          None, op_text("not", language))
    op, lhs, rhs = tree
    return SyntaxNode(NodeKind.BINARY_EXPR, _SPAN,
                      [to_node(lhs, language), op_token(op, language), to_node(rhs, language)],
                      None, op_text(op, language))


def to_text(tree, language=PYTHON):
    """Fully parenthesized source text."""
    if not isinstance(tree, tuple):
        if isinstance(tree, bool):
            return ("True" if tree else "False") if language == PYTHON else ("true" if tree else "false")
        return str(tree)
    if tree[0] == "not":
        return f"{op_text('not', language)}{' ' if language == PYTHON else ''}({to_text(tree[1], language)})"
    op, lhs, rhs = tree
    return f"({to_text(lhs, language)}) {op_text(op, language)} ({to_text(rhs, language)})"


def expected_verdict(vec, closed):
    """What a sound evaluator may answer, given the outcome vector.

    Returns ``(required, allowed)``: for closed trees ``required`` is the
    one correct truth value; for open trees ``required`` is "unknown"
    when the truth varies with the free variable, else None (both the
    forced value and "unknown" are acceptable, listed in ``allowed``).
    """
    outcomes = {truth_outcome(v) for v in vec}
    if closed:
        (only,) = outcomes
        return only, {only}
    if len(outcomes) > 1:
        return "unknown", {"unknown"}
    (only,) = outcomes
    return None, {"unknown", only} if only is not RAISED else {"unknown"}


def exhaustive_check(eval_bool_fn, depth=3, limit_mismatches=20):
    """Compare ``eval_bool_fn(node) -> True/False/"unknown"`` against the
    reference on every tree of depth <= ``depth``.

    The top operator node is reused and its children swapped in place, and
    reference results are memoized per (operator, lhs vector, rhs vector),
    so the cost is dominated by the evaluator under test.
    """
    sub = trees(depth - 1)
    ids = {}
    sub_vec, sub_closed, sub_node = [], [], []
    for t in sub:
        vec = tuple(py_eval(t, x) for x in DOMAIN)
        sub_vec.append(ids.setdefault(tuple(map(repr, vec)), (len(ids), vec)))
        sub_closed.append(is_closed(t))
        sub_node.append(to_node(t))

    stats = {"closed": 0, "open": 0, "open_forced_unknown": 0, "checked": 0}
    mismatches = []

    def check(tree_desc, node, vec, closed):
        required, allowed = expected_verdict(vec, closed)
        got = eval_bool_fn(node)
        stats["checked"] += 1
        stats["closed" if closed else "open"] += 1
        if required == "unknown":
            stats["open_forced_unknown"] += 1
        if got not in allowed and len(mismatches) < limit_mismatches:
            mismatches.append((tree_desc(), got, allowed))
        return got in allowed

    ok = True
    for t in list(LEAVES) + [("not", s) for s in sub]:
        vec = tuple(py_eval(t, x) for x in DOMAIN)
        ok &= check(lambda t=t: t, to_node(t), vec, is_closed(t))

    memo = {}
    for op in BINARY:
        tok = op_token(op, PYTHON)
        top = to_node((op, 0, 0))
        children = top.children
        children[1] = tok
        for i, (ida, va) in enumerate(sub_vec):
            children[0] = sub_node[i]
            ca = sub_closed[i]
            for j, (idb, vb) in enumerate(sub_vec):
                children[2] = sub_node[j]
                closed = ca and sub_closed[j]
                key = (ida, idb, closed)
                verdict = memo.get(key)
                if verdict is None:
                    vec = tuple(py_apply(op, a, b) for a, b in zip(va, vb))
                    verdict = memo[key] = expected_verdict(vec, closed)
                required, allowed = verdict
                got = eval_bool_fn(top)
                if got not in allowed:
                    ok = False
                    if len(mismatches) < limit_mismatches:
                        mismatches.append(((op, sub[i], sub[j]), got, allowed))
                stats["checked"] += 1
                stats["closed" if closed else "open"] += 1
                if required == "unknown":
                    stats["open_forced_unknown"] += 1
        memo.clear()  # keys do not carry the operator
    return ok, stats, mismatches
