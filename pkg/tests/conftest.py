from pathlib import Path

import pytest

from usagescan.analysis import load_builtin_analyzers
from usagescan.frontends import parse_source

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"


def parse(text, path="t.py"):
    f = parse_source(text, path)
    assert f is not None, path
    return f


def corpus_files():
    """Every decodable supported fixture file as (path, text)."""
    out = []
    for p in sorted(CORPUS.rglob("*")):
        if p.suffix in (".kt", ".kts", ".py") and p.is_file():
            try:
                out.append((p, p.read_text(encoding="utf-8")))
            except UnicodeDecodeError:
                pass
    return out


@pytest.fixture(scope="session")
def registry():
    return load_builtin_analyzers()
