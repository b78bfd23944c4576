"""Numerical core: radial grid, profiles, modulation, ansatz, extractor, evolver and functionals."""
