"""Hilfer-Hadamard fractional boundary value problems on (1, e].

Quadrature for Hadamard-type fractional operators, the closed-form solution
of the linear nonlocal problem, Picard iteration for the nonlinear one and
numerical checks of four fixed-point existence criteria.
"""

__version__ = "0.1.0"
