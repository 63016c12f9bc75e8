"""Unit-disk range counting structures and their downstream algorithms."""

__version__ = "0.1.0"
