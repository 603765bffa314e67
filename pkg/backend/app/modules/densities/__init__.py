"""Densities, shapes and the bundled alternative families."""
