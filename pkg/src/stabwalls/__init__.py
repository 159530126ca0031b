"""Exact numerics for walls and chambers of stability conditions on surfaces."""

__version__ = "0.1.0"
