"""Exact computation with finitely generated R-forests and 1-1-Lipschitz predicates."""
__version__ = "0.1.0"
