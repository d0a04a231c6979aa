"""Causally-informed selective de-correlation for skyline queries."""

__version__ = "0.1.0"
