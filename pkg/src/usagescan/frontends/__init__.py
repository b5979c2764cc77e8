"""Frontend registry: file extension -> (language, parse function)."""

from __future__ import annotations

import logging
from pathlib import PurePosixPath
from typing import Callable

from ..cst import KOTLIN, PYTHON, ParsedFile, SourceLanguage
from .kotlin import parse_kotlin
from .python import parse_python

log = logging.getLogger(__name__)

ParseFn = Callable[[str, str], ParsedFile]


class FrontendRegistry:
    def __init__(self):
        self.entries: dict[str, tuple[SourceLanguage, ParseFn]] = {}

    def register(self, extension: str, language: SourceLanguage, parse: ParseFn) -> None:
        ext = extension.lower()
        if not ext.startswith("."):
            ext = "." + ext
        if ext in self.entries and self.entries[ext][1] is not parse:
            raise ValueError(f"extension {ext} already has a frontend")
        self.entries[ext] = (language, parse)

    def lookup(self, path: str) -> tuple[SourceLanguage, ParseFn] | None:
        return self.entries.get(PurePosixPath(path).suffix.lower())

    @property
    def extensions(self) -> frozenset[str]:
        return frozenset(self.entries)


registry = FrontendRegistry()
registry.register(".kt", KOTLIN, parse_kotlin)
registry.register(".kts", KOTLIN, parse_kotlin)
registry.register(".py", PYTHON, parse_python)


def detect_language(path: str) -> SourceLanguage | None:
    entry = registry.lookup(path)
    return entry[0] if entry else None


def parse_source(source_text: str, path: str) -> ParsedFile | None:
    """Parse text with the frontend registered for ``path``; None if unsupported."""
    entry = registry.lookup(path)
    if entry is None:
        return None
    return entry[1](source_text, path)


class UndecodableFile(ValueError):
    pass


def parse_bytes(data: bytes, path: str) -> ParsedFile | None:
    """Decode UTF-8 and parse; raises UndecodableFile for invalid UTF-8."""
    if registry.lookup(path) is None:
        return None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise UndecodableFile(f"{path}: not valid UTF-8 ({e.reason} at byte {e.start})") from None
    return parse_source(text, path)


__all__ = ["FrontendRegistry", "registry", "detect_language", "parse_source",
           "parse_bytes", "parse_kotlin", "parse_python", "UndecodableFile"]
