"""Finite group actions on the unit cube and invariance checks."""
