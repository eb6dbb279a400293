"""Exact and Monte Carlo spectra of random quantum channels built from Haar unitaries."""

__version__ = "0.1.0"
