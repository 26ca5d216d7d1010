"""Exact computations for Takiff superalgebras and affine Takiff gl(1|1)."""

__version__ = "0.1.0"
