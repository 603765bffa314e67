"""Likelihood-ratio statistics and their numerical subroutines."""
