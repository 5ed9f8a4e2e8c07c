"""Exact holographic tensor networks for deformed Fredkin chains and their 2D couplings."""

__version__ = "0.1.0"
