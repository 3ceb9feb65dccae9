"""Numerical laboratory for central limit theorems of integrated periodograms
under long memory: exact finite-n laws, Wasserstein distances, kernel bounds and
Whittle estimation."""

__version__ = "0.1.0"
