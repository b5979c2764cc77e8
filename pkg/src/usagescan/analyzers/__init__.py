"""Built-in analyzers; importing this package registers them."""

from . import kotlin_ranges, python_unreachable_while, keyword_count

__all__ = ["kotlin_ranges", "python_unreachable_while", "keyword_count"]
