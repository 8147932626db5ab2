"""Finite combinatorics toolkit for hereditary classes of relational structures."""

__version__ = "0.1.0"
