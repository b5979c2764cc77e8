"""Corpus-scale analysis of programming-language construct usage."""

__version__ = "0.1.0"
