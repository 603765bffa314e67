"""Seed streams, chunked Monte Carlo execution and result persistence."""
