"""Exact symbolic cobar and cylinder operad calculus over the rationals."""

__version__ = "0.1.0"
