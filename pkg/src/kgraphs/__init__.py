"""Finite higher-rank graphs: factorization rules, matched pairs and quasi-product analysis."""

__version__ = "0.1.0"
