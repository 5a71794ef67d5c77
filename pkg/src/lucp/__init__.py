"""Generalized crossed products over rings with local units, their cohomology
and the seven-term sequence, computed exactly over finite prime fields."""

__version__ = "0.1.0"
