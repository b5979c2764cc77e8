import pytest

from conftest import corpus_files, parse
from usagescan.cst import (NodeKind as K, ParsedFile, Span, SyntaxNode, ancestors, check_tree,
                           find_all, node_text, preorder, PYTHON)


def _node(kind, start, end, *children, aux=None):
    n = SyntaxNode(kind, Span(start, end, 1), list(children), None, aux)
    for c in children:
        c.parent = n
    return n


def test_preorder_single_node():
    root = _node(K.FILE, 0, 0)
    assert list(preorder(root)) == [root]


def test_preorder_order():
    lit = _node(K.BOOL_LITERAL, 6, 11, aux="False")
    block = _node(K.BLOCK, 17, 21)
    loop = _node(K.WHILE_STMT, 0, 21, lit, block)
    root = _node(K.FILE, 0, 22, loop)
    assert [n.kind for n in preorder(root)] == [K.FILE, K.WHILE_STMT, K.BOOL_LITERAL, K.BLOCK]


def _count_recursive(node):
    return 1 + sum(_count_recursive(c) for c in node.children)


def test_preorder_count_matches_recursive_counter():
    f = parse("x = 1\nwhile x < 3:\n    x = x + 1\nprint(x)\n")
    nodes = list(preorder(f.root))
    assert len(nodes) == _count_recursive(f.root)
    assert len({id(n) for n in nodes}) == len(nodes)
    seen = set()
    for n in nodes:
        assert all(id(a) in seen for a in ancestors(n))
        seen.add(id(n))


def test_ancestors_of_root_is_empty():
    f = parse("pass\n")
    assert list(ancestors(f.root)) == []


def test_ancestors_two_levels():
    f = parse("while False:\n    pass\n")
    lit = find_all(f.root, K.BOOL_LITERAL)[0]
    assert [a.kind for a in ancestors(lit)] == [K.WHILE_STMT, K.FILE]


def test_ancestors_reverse_recorded_path():
    f = parse("def f():\n    for i in g():\n        if i:\n            while (i + (2)):\n                pass\n")
    # path recorded while walking down from the root to the deepest node
    path, node = [], f.root
    while node.children:
        path.append(node)
        node = max(node.children, key=lambda c: _depth(c))
    assert list(ancestors(node)) == list(reversed(path))


def _depth(n):
    return 1 + max((_depth(c) for c in n.children), default=0)


def test_node_text_root():
    f = parse("x = 1\n")
    assert node_text(f, f.root) == "x = 1\n"


def test_node_text_literal():
    f = parse("while (2+2 != 4) {}\n", "t.kt")
    lit = find_all(f.root, K.INT_LITERAL)[0]
    assert node_text(f, lit) == "2"


def test_node_text_fig2_body_hand_sliced():
    text = "while False:\n    print('dead')\n    x += 1\ny = 2\n"
    f = parse(text)
    loop = find_all(f.root, K.WHILE_STMT)[0]
    body = loop.first_child(K.BLOCK)
    # offsets counted by hand: the body starts after "while False:\n    "
    assert node_text(f, body) == text[17:41] == "print('dead')\n    x += 1"


def test_node_text_out_of_bounds():
    f = parse("x\n")
    rogue = SyntaxNode(K.OTHER, Span(0, 50, 1), [], f.root)
    with pytest.raises(ValueError):
        node_text(f, rogue)


def test_span_validation():
    with pytest.raises(ValueError):
        Span(5, 3, 1)
    with pytest.raises(ValueError):
        Span(-1, 3, 1)
    with pytest.raises(ValueError):
        Span(0, 3, 0)


def test_byte_spans_with_multibyte_text():
    text = "s = 'héllo'  # ünïcode\nwhile False:\n    pass\n"
    f = parse(text)
    assert f.root.span.end_byte == len(text.encode("utf-8"))
    loop = find_all(f.root, K.WHILE_STMT)[0]
    assert loop.line == 2
    assert node_text(f, loop) == "while False:\n    pass"


def test_check_tree_rejects_overlap():
    a = _node(K.IDENTIFIER, 0, 3, aux="a")
    b = _node(K.IDENTIFIER, 2, 4, aux="b")
    root = _node(K.FILE, 0, 4, a, b)
    with pytest.raises(AssertionError):
        check_tree(ParsedFile("t.py", PYTHON, root, "abcd"))


@pytest.mark.parametrize("path,text", corpus_files(), ids=lambda v: getattr(v, "name", ""))
def test_fixture_tree_invariants(path, text):
    f = parse(text, path.name)
    check_tree(f)
    data = f.source_bytes
    for n in preorder(f.root):
        # text reconstruction: children plus the gaps between them
        pieces, pos = [], n.span.start_byte
        for c in n.children:
            pieces.append(data[pos:c.span.start_byte])
            pieces.append(node_text(f, c).encode("utf-8"))
            pos = c.span.end_byte
        pieces.append(data[pos:n.span.end_byte])
        assert b"".join(pieces).decode("utf-8") == node_text(f, n)
        steps = sum(1 for _ in ancestors(n))
        assert steps < 10_000
