"""Exact CTL model checking and learned surrogates for it."""

__version__ = "0.1.0"
