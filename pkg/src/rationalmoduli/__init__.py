"""Exact rational models for moduli spaces of curves.

Bigraded E1 models of normal-crossings complements, assembled for moduli
spaces from stable graphs, with Sullivan k-minimal models and formality
certificates over the rationals.
"""

__version__ = "0.1.0"
