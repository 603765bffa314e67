"""Invariant likelihood-ratio lab: average, maximum and integrated LR tests."""

__version__ = "0.1.0"
