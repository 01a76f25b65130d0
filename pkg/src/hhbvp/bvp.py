r"""The n-point nonlocal boundary value problem and its fixed-point operator.

The problem is

.. math::

    {}_H D^{\alpha,\beta} x(t) + f(t, x(t)) = 0, \qquad t \in (1, e],

    x(1+\varepsilon) = \sum_i \nu_i x(\zeta_i), \qquad
    \delta x(e) = \sum_i \sigma_i\, \delta x(\zeta_i),

with :math:`1 < \alpha \le 2` and :math:`0 \le \beta \le 1`. For a forcing
:math:`\varphi` the linear problem :math:`{}_H D^{\alpha,\beta} x + \varphi = 0`
has the solution

.. math::

    x(t) = -{}_H I^\alpha \varphi(t) + c_0 (\log t)^{\gamma-1} + c_1 (\log t)^{\gamma-2},

where :math:`\gamma = \alpha + 2\beta - \alpha\beta` and the coefficients solve
the two boundary rows.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from hhbvp.expr import Expression
from hhbvp.fraccalc import FracOrder, delta_operator, hadamard_integral_at, hadamard_integral_grid
from hhbvp.grid import GridFunction, PowerTerm

DEGENERACY_TOL = 1e-12


class ProblemError(ValueError):
    """Invalid problem data; ``key`` names the offending field when known."""

    def __init__(self, message: str, key: str | None = None) -> None:
        super().__init__(message)
        self.key = key


class DegenerateProblemError(ProblemError):
    """The boundary system is singular (``lambda = 0``)."""

    def __init__(self, lam: float) -> None:
        super().__init__(
            f"lambda = {lam:.3e} vanishes; the boundary conditions do not determine a solution"
        )
        self.lam = lam


@dataclass(frozen=True)
class Problem:
    """Data of the boundary value problem.

    ``f`` is an expression in ``t`` and ``x``. The optional fields feed the
    existence checkers: a Lipschitz constant, a bound ``g(t)`` on ``|f|``, a
    growth pair ``q(t)``/``vartheta(u)`` and the Boyd-Wong weight ``w(t)``.
    """

    alpha: float
    beta: float
    epsilon: float
    zeta: tuple[float, ...]
    nu: tuple[float, ...]
    sigma: tuple[float, ...]
    f: Expression
    lipschitz: float | None = None
    g: Expression | None = None
    q: Expression | None = None
    vartheta: Expression | None = None
    weight: Expression | None = None

    def __post_init__(self) -> None:
        for name in ("zeta", "nu", "sigma"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if not 1.0 < self.alpha <= 2.0:
            raise ProblemError(f"alpha must lie in (1, 2], got {self.alpha}", "alpha")
        if not 0.0 <= self.beta <= 1.0:
            raise ProblemError(f"beta must lie in [0, 1], got {self.beta}", "beta")
        if not 0.0 < self.epsilon < 1.0:
            raise ProblemError(f"epsilon must lie in (0, 1), got {self.epsilon}", "epsilon")
        if not len(self.zeta) == len(self.nu) == len(self.sigma):
            raise ProblemError(
                "zeta, nu and sigma must have equal lengths, got "
                f"{len(self.zeta)}, {len(self.nu)}, {len(self.sigma)}",
                "zeta",
            )
        for z in self.zeta:
            if not 1.0 < z < math.e:
                raise ProblemError(f"zeta entry {z} is outside (1, e)", "zeta")
        if self.lipschitz is not None and self.lipschitz < 0:
            raise ProblemError(
                f"Lipschitz constant C must be non-negative, got {self.lipschitz}", "C"
            )

    @property
    def order(self) -> FracOrder:
        return FracOrder(self.alpha, self.beta)

    def rhs(self, t, x):
        """Evaluate the nonlinearity ``f(t, x)`` (vectorized)."""
        return self.f(t=t, x=x)


@dataclass(frozen=True)
class BvpConstants:
    gamma: float
    mu1: float
    mu2: float
    delta1: float
    delta2: float
    lam: float

    def as_dict(self) -> dict[str, float]:
        return {
            "gamma": self.gamma,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "lambda": self.lam,
        }


@dataclass(frozen=True)
class LinearSolveDetail:
    """Coefficients of the homogeneous modes and the four boundary brackets."""

    c0: float
    c1: float
    int_alpha_at_1eps: float
    sum_nu_int_alpha: float
    int_alpha1_at_e: float
    sum_sigma_int_alpha1: float

    @property
    def first_bracket(self) -> float:
        return self.int_alpha_at_1eps - self.sum_nu_int_alpha

    @property
    def second_bracket(self) -> float:
        return self.int_alpha1_at_e - self.sum_sigma_int_alpha1


def compute_constants(problem: Problem) -> BvpConstants:
    """The constants ``gamma, mu1, mu2, delta1, delta2, lambda`` of the problem."""
    a, b = problem.alpha, problem.beta
    gamma = a + 2.0 * b - a * b
    log_eps = math.log1p(problem.epsilon)
    logs = [math.log(z) for z in problem.zeta]

    mu1 = log_eps ** (gamma - 1.0) - sum(n * lz ** (gamma - 1.0) for n, lz in zip(problem.nu, logs))
    mu2 = log_eps ** (gamma - 2.0) - sum(n * lz ** (gamma - 2.0) for n, lz in zip(problem.nu, logs))
    delta1 = 1.0 - sum(s * lz ** (gamma - 2.0) for s, lz in zip(problem.sigma, logs))
    delta2 = 1.0 - sum(s * lz ** (gamma - 3.0) for s, lz in zip(problem.sigma, logs))
    lam = (gamma - 1.0) * delta1 * mu2 - (gamma - 2.0) * delta2 * mu1

    if abs(lam) < DEGENERACY_TOL:
        raise DegenerateProblemError(lam)
    return BvpConstants(gamma, mu1, mu2, delta1, delta2, lam)


def linear_solution(
    problem: Problem, phi: GridFunction, constants: BvpConstants | None = None
) -> tuple[GridFunction, LinearSolveDetail]:
    """Solve ``D^{alpha,beta} x + phi = 0`` with the problem's boundary rows.

    The two homogeneous modes are attached to the result as exact power
    terms, so the returned function is singular at ``t = 1`` whenever
    ``gamma < 2`` and ``c1 != 0``.
    """
    k = constants if constants is not None else compute_constants(problem)
    a = problem.alpha

    def weighted(order: float, weights: Sequence[float]) -> float:
        return sum(w * hadamard_integral_at(phi, order, z) for w, z in zip(weights, problem.zeta))

    i_eps = hadamard_integral_at(phi, a, 1.0 + problem.epsilon)
    nu_sum = weighted(a, problem.nu)
    i_e = hadamard_integral_at(phi, a - 1.0, math.e)
    sigma_sum = weighted(a - 1.0, problem.sigma)

    first = i_eps - nu_sum
    second = i_e - sigma_sum
    g = k.gamma
    c1 = ((g - 1.0) * k.delta1 * first - k.mu1 * second) / k.lam
    c0 = (-(g - 2.0) * k.delta2 * first + k.mu2 * second) / k.lam

    particular = -hadamard_integral_grid(phi, a)
    x = GridFunction(
        phi.grid,
        particular.values,
        particular.terms + (PowerTerm(c0, g - 1.0), PowerTerm(c1, g - 2.0)),
    )
    return x, LinearSolveDetail(c0, c1, i_eps, nu_sum, i_e, sigma_sum)


def boundary_residual(problem: Problem, x: GridFunction) -> tuple[float, float]:
    """Residuals of both boundary rows; off-node values by cubic interpolation."""
    zeta = np.asarray(problem.zeta)
    log_zeta = np.log(zeta)
    x_eps = x.at_log(math.log1p(problem.epsilon))
    r1 = x_eps - float(np.dot(problem.nu, x.at_log(log_zeta))) if zeta.size else x_eps

    dx = delta_operator(x, 1)
    dx_e = dx.at_log(1.0)
    r2 = dx_e - float(np.dot(problem.sigma, dx.at_log(log_zeta))) if zeta.size else dx_e
    return float(r1), float(r2)


def sample_forcing(problem: Problem, x: GridFunction) -> GridFunction:
    """The samples ``f(t_j, x_j)`` as a grid function.

    When ``x`` is unbounded at ``t = 1`` the value there is replaced by a
    linear extrapolation from the next two nodes.
    """
    grid = x.grid
    nodal = x.nodal
    t = grid.t
    start = x.first
    values = np.empty(grid.n + 1)
    values[start:] = problem.rhs(t[start:], nodal[start:])
    if start:
        values[0] = 2.0 * values[1] - values[2]
    return GridFunction(grid, values)


def apply_rho(
    problem: Problem, x: GridFunction, constants: BvpConstants | None = None
) -> GridFunction:
    """The fixed-point operator: the linear solution with forcing ``f(t, x(t))``."""
    return linear_solution(problem, sample_forcing(problem, x), constants)[0]
