"""Porous medium equation on Ricci-flow backgrounds: solver and estimate checks."""

__version__ = "0.1.0"
