"""Numerical toolkit for parabolic equations with Holder-Dini data and the flows they induce."""

__version__ = "0.1.0"
