"""Reconstruct points and application from composition tables of fully-transpositional semigroups."""

__version__ = "0.1.0"
