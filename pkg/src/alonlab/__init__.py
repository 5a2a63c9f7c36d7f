"""Spectral laboratory for random regular graphs, tangles and non-backtracking traces."""

__version__ = "0.1.0"
