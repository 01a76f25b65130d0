"""Picard iteration of the fixed-point operator and a posteriori residuals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hhbvp.bvp import BvpConstants, Problem, apply_rho, boundary_residual, compute_constants, sample_forcing
from hhbvp.certify import compute_phi
from hhbvp.fraccalc import hilfer_hadamard_derivative
from hhbvp.grid import Grid, GridFunction

DEFAULT_GRID_N = 1024
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200

# divergence policy: this many consecutive growing steps, each beyond
# DIVERGENCE_FACTOR times the first step, stop the iteration
DIVERGENCE_STREAK = 3
DIVERGENCE_FACTOR = 10.0

RATIO_SLACK = 0.05


@dataclass(frozen=True, eq=False)
class Solution:
    """Outcome of a Picard run.

    ``step_norms[k]`` is the sup-norm distance between iterates ``k`` and
    ``k + 1``; ``ratios[k]`` is ``step_norms[k + 1] / step_norms[k]``.
    ``ratio_bound`` is ``C * Phi + 0.05`` when a Lipschitz constant was known.
    """

    x: GridFunction
    iterations: int
    step_norms: tuple[float, ...]
    ratios: tuple[float, ...]
    converged: bool
    diverged: bool = False
    tol: float = DEFAULT_TOL
    ratio_bound: float | None = None

    @property
    def max_ratio(self) -> float | None:
        return max(self.ratios) if self.ratios else None

    @property
    def ratios_within_bound(self) -> bool | None:
        if self.ratio_bound is None:
            return None
        return all(r <= self.ratio_bound for r in self.ratios)

    @property
    def status(self) -> str:
        if self.converged:
            return "converged"
        return "diverged" if self.diverged else "max_iter reached"


@dataclass(frozen=True)
class Residuals:
    """Residuals of the equation row (interior max) and both boundary rows."""

    ode: float
    r1: float
    r2: float
    excluded: int

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.ode, self.r1, self.r2)):
            raise ValueError(f"non-finite residuals: {self}")


def _ratio(step: float, previous: float) -> float:
    return step / previous if previous > 0.0 else 0.0


def _contraction_bound(problem: Problem, constants: BvpConstants) -> float | None:
    if problem.lipschitz is None:
        return None
    return problem.lipschitz * compute_phi(problem, constants) + RATIO_SLACK


def picard_solve(
    problem: Problem,
    x0: GridFunction | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    grid: Grid | None = None,
) -> Solution:
    """Iterate ``x_{k+1} = rho(x_k)`` until the sup-norm step is at most ``tol``.

    The initial guess defaults to ``x = 0`` on ``grid`` (``N = 1024`` if no
    grid is given). The run stops early, flagged as diverged, once the step
    grows three times in a row while exceeding ten times the first step.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    if x0 is None:
        x0 = GridFunction.zeros(grid if grid is not None else Grid(DEFAULT_GRID_N))
    elif grid is not None and x0.grid != grid:
        raise ValueError("initial guess lives on a different grid")

    constants = compute_constants(problem)
    x = x0
    steps: list[float] = []
    streak = 0
    converged = diverged = False
    for _ in range(max_iter):
        nxt = apply_rho(problem, x, constants)
        step = (nxt - x).norm()
        if steps and step > steps[-1] and step > DIVERGENCE_FACTOR * steps[0]:
            streak += 1
        else:
            streak = 0
        steps.append(step)
        x = nxt
        if step <= tol:
            converged = True
            break
        if streak >= DIVERGENCE_STREAK or not math.isfinite(step):
            diverged = True
            break

    ratios = tuple(_ratio(b, a) for a, b in zip(steps, steps[1:]))
    return Solution(
        x=x,
        iterations=len(steps),
        step_norms=tuple(steps),
        ratios=ratios,
        converged=converged,
        diverged=diverged,
        tol=tol,
        ratio_bound=_contraction_bound(problem, constants),
    )


def interior_start(n: int) -> int:
    """First node used by the equation residual: ``ceil(N / 8)``."""
    return -(-n // 8)


def verify_solution(problem: Problem, x: GridFunction) -> Residuals:
    """Residuals of ``D^{alpha,beta} x + f(t, x)`` and both boundary rows.

    The equation residual is a max over nodes ``j >= N/8``; nodes closer to
    ``t = 1`` are dominated by the singular mode and are excluded. Meant for
    grids with ``N >= 256``.
    """
    start = interior_start(x.grid.n)
    lhs = hilfer_hadamard_derivative(x, problem.order).nodal
    forcing = sample_forcing(problem, x).nodal
    ode = float(np.max(np.abs(lhs[start:] + forcing[start:])))
    r1, r2 = boundary_residual(problem, x)
    return Residuals(ode=ode, r1=r1, r2=r2, excluded=start)
