"""Cyclone exposure indicators and growth-impact estimators."""

__version__ = "0.1.0"
