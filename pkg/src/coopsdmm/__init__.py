"""Cooperative secure distributed matrix multiplication and PIR over prime fields."""

__version__ = "0.1.0"
