"""Exact Koszul cohomology of line bundles on products of projective spaces."""

__version__ = "0.1.0"
