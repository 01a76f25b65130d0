"""The two worked example problems and their reference constants.

Reference values are given to the digits in which they were published; the
closed-form quantities recomputed here agree with them to those digits,
except ``Phi`` and ``L_star`` of the second example (see the README).
"""

from __future__ import annotations

import math

from hhbvp.bvp import Problem
from hhbvp.expr import Expression

EXAMPLE_41_REFERENCE = {
    "gamma": 1.75,
    "mu1": 0.59779,
    "mu2": 1.63780,
    "delta1": -1.37703,
    "delta2": -3.81518,
    "lambda": -2.26164,
    "Phi": 3.835201,
    "C_Phi": 0.06613554378,
}

EXAMPLE_42_REFERENCE = {
    "gamma": 11.0 / 6.0,
    "mu1": -0.395713,
    "mu2": -2.865742,
    "delta1": 3.65750,
    "delta2": 19.04369,
    "lambda": -9.990516,
    "Phi": 3.414437455,
    "L_star": 1.320578171,
}


def example_41() -> Problem:
    """Two-point data with a Lipschitz nonlinearity, ``C = 3/(64 e)``."""
    return Problem(
        alpha=1.5,
        beta=0.5,
        epsilon=0.3,
        zeta=(1.5, 1.75),
        nu=(0.5, -0.75),
        sigma=(2.0 / 3.0, 4.0 / 3.0),
        f=Expression.parse("(sqrt(t) + 2*log(t)) / (2*exp(t)*(3 + t)^2) * (abs(x) / (2 + abs(x)))"),
        lipschitz=3.0 / (64.0 * math.e),
    )


def example_42() -> Problem:
    """Three-point data with growth bound ``q(t) = 1 + log t``, ``vartheta(u) = (u + 1)/12``."""
    return Problem(
        alpha=1.5,
        beta=2.0 / 3.0,
        epsilon=0.5,
        zeta=(4.0 / 3.0, 2.0, 9.0 / 7.0),
        nu=(2.0, -0.5, 5.0 / 3.0),
        sigma=(-1.0, 3.0, -11.0 / 3.0),
        f=Expression.parse("(1 + log(t)) / (t + 1)^2 * ((abs(x) + 1) / (3 + abs(x)))"),
        q=Expression.parse("1 + log(t)", allowed=frozenset({"t"})),
        vartheta=Expression.parse("(u + 1)/12", allowed=frozenset({"u"})),
    )
