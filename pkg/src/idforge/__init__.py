"""Finite combinatorics of coloring identities over a free product-measure algebra."""

__version__ = "0.1.0"
