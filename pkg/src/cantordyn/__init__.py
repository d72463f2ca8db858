"""Exact classification of subgroup-chain towers and finite-depth Cantor dynamics."""

__version__ = "0.1.0"
