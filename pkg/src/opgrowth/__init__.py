"""Operator-growth diagnostics for dephasing-driven open quantum lattice models.

Pipelines: bi-orthonormal Lanczos recursion on translation-invariant Pauli
operators, moment sequences for three model families, Hankel-determinant and
recursive moment-to-recurrence transforms, and the spectral-function
exponential-to-power-law crossover analysis.
"""

__version__ = "0.1.0"

from . import bilanczos, hankel, lindblad, moments, opspace, scalars, spectral

__all__ = [
    "__version__",
    "bilanczos",
    "hankel",
    "lindblad",
    "moments",
    "opspace",
    "scalars",
    "spectral",
]
