"""Subpopulation-based multi-objective optimization with DE, GDE3 and novelty search."""

__version__ = "0.1.0"
