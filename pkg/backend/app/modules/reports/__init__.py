"""Experiment configs, bundled scenarios, commands and result files."""
