"""Certified and exact numerical checks for several extremal constants."""

__version__ = "0.1.0"
