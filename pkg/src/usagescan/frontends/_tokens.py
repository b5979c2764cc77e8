from __future__ import annotations

from dataclasses import dataclass


@dataclass(slots=True)
class Token:
    kind: str       # name, keyword, int, float, string, char, op, newline, indent, dedent, eof, error
    text: str
    start: int      # character offsets into the source text
    end: int
    nl_before: bool = False
    ws_before: bool = False

    def is_op(self, *texts: str) -> bool:
        return self.kind == "op" and self.text in texts

    def is_kw(self, *texts: str) -> bool:
        return self.kind == "keyword" and self.text in texts

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.start})"


def scan_number(text: str, i: int, *, python: bool) -> tuple[int, str]:
    """Scan a numeric literal starting at ``i``; return (end, kind)."""
    n = len(text)
    start = i
    if text[i] == "0" and i + 1 < n and text[i + 1] in "xXbBoO":
        base = text[i + 1].lower()
        if base == "o" and not python:
            return i + 1, "int"
        i += 2
        digits = "0123456789abcdefABCDEF_" if base == "x" else ("01_" if base == "b" else "01234567_")
        while i < n and text[i] in digits:
            i += 1
        kind = "int"
    else:
        kind = "int"
        while i < n and (text[i].isdigit() or text[i] == "_"):
            i += 1
        if i + 1 < n and text[i] == "." and text[i + 1].isdigit():
            kind = "float"
            i += 1
            while i < n and (text[i].isdigit() or text[i] == "_"):
                i += 1
        elif python and i < n and text[i] == "." and not (i + 1 < n and text[i + 1] == "."):
            # "1." is a float in Python
            if not (i + 1 < n and (text[i + 1].isalpha() or text[i + 1] == "_")):
                kind = "float"
                i += 1
        if i < n and text[i] in "eE":
            j = i + 1
            if j < n and text[j] in "+-":
                j += 1
            if j < n and text[j].isdigit():
                kind = "float"
                i = j
                while i < n and (text[i].isdigit() or text[i] == "_"):
                    i += 1
    if python:
        if i < n and text[i] in "jJ":
            i += 1
            kind = "float"
    else:
        if i < n and text[i] in "fF":
            i += 1
            kind = "float"
        else:
            if i < n and text[i] in "uU":
                i += 1
                kind = "uint"
            if i < n and text[i] == "L":
                i += 1
                kind = "long" if kind == "int" else kind
    assert i > start
    return i, kind


def match_op(text: str, i: int, ops: tuple[str, ...]) -> str | None:
    for op in ops:
        if text.startswith(op, i):
            return op
    return None
