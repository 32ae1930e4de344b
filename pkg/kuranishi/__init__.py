"""Exact verification of curved cyclic A-infinity algebras over a truncated Novikov ring."""

__version__ = "1.0.0"
