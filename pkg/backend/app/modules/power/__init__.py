"""Calibration, Monte Carlo power, duels and exact oracles."""
