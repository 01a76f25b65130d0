r"""Log-uniform grids on :math:`[1, e]` and functions sampled on them.

All numerics work in the logarithmic coordinate :math:`u = \log t`, so the
interval :math:`[1, e]` becomes :math:`[0, 1]` with nodes :math:`u_j = j/N`.

A :class:`GridFunction` is the sum of a *regular* part, stored as finite
samples at every node, and a (usually empty) tuple of exact power terms
:math:`c\,u^p`. The power terms carry the homogeneous modes
:math:`(\log t)^{\gamma-1}` and :math:`(\log t)^{\gamma-2}`, the latter of which
is unbounded at :math:`t = 1` and cannot be sampled there.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

MIN_NODES = 16


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` cells in :math:`u = \\log t \\in [0, 1]`."""

    n: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < MIN_NODES:
            raise ValueError(f"grid needs an integer N >= {MIN_NODES}, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def u(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    @property
    def t(self) -> np.ndarray:
        return np.exp(self.u)


@dataclass(frozen=True)
class PowerTerm:
    """The exact function :math:`c\\,u^p`."""

    coef: float
    power: float

    def __call__(self, u: np.ndarray | float) -> np.ndarray | float:
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return self.coef * u**self.power

    @property
    def singular(self) -> bool:
        return self.power < 0 and self.coef != 0.0


def _merge_terms(terms: Iterable[PowerTerm]) -> tuple[PowerTerm, ...]:
    acc: dict[float, float] = {}
    for term in terms:
        acc[term.power] = acc.get(term.power, 0.0) + term.coef
    return tuple(PowerTerm(c, p) for p, c in sorted(acc.items()) if c != 0.0)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on a :class:`Grid` plus optional exact power terms.

    ``values`` holds the regular part at every node. When the function is
    singular at the left end (``left_singular`` set, or a power term with a
    negative exponent), the total value at ``t = 1`` is undefined and node 0
    is skipped by norms and exports.
    """

    grid: Grid
    values: np.ndarray
    terms: tuple[PowerTerm, ...] = ()
    left_singular: bool = False

    _spline: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n + 1,):
            raise ValueError(
                f"expected {self.grid.n + 1} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "terms", _merge_terms(self.terms))

    # {{{ constructors

    @classmethod
    def from_callable(
        cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray], *, left_singular: bool = False
    ) -> GridFunction:
        """Sample ``func(t)`` at the physical nodes.

        With ``left_singular`` the node ``t = 1`` is not evaluated and a
        linear extrapolation of the next two nodes is stored instead.
        """
        t = grid.t
        if left_singular:
            inner = np.asarray(func(t[1:]), dtype=float) * np.ones(grid.n)
            values = np.concatenate([[2.0 * inner[0] - inner[1]], inner])
        else:
            values = np.asarray(func(t), dtype=float) * np.ones(grid.n + 1)
        return cls(grid, values, left_singular=left_singular)

    @classmethod
    def from_log_callable(
        cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray], *, left_singular: bool = False
    ) -> GridFunction:
        """Sample ``func(u)`` with ``u = log t`` at the nodes."""
        return cls.from_callable(grid, lambda t: func(np.log(t)), left_singular=left_singular)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> GridFunction:
        return cls(grid, np.full(grid.n + 1, float(value)))

    @classmethod
    def zeros(cls, grid: Grid) -> GridFunction:
        return cls.constant(grid, 0.0)

    @classmethod
    def power(cls, grid: Grid, power: float, coef: float = 1.0) -> GridFunction:
        """The exact term ``coef * (log t)**power`` with zero regular part."""
        return cls(grid, np.zeros(grid.n + 1), terms=(PowerTerm(coef, power),))

    # }}}

    @property
    def singular_at_left(self) -> bool:
        return self.left_singular or any(term.singular for term in self.terms)

    @property
    def first(self) -> int:
        """Index of the first node carrying a meaningful value."""
        return 1 if self.singular_at_left else 0

    def terms_at(self, u: np.ndarray | float) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for term in self.terms:
            out = out + term(u)
        return out

    @property
    def nodal(self) -> np.ndarray:
        """Total values at every node; ``nan`` at node 0 when singular there."""
        u = self.grid.u
        out = self.values.copy()
        if self.terms:
            out[1:] += self.terms_at(u[1:])
            if self.singular_at_left:
                out[0] = np.nan
            else:
                out[0] += sum(t.coef for t in self.terms if t.power == 0.0)
        elif self.left_singular:
            out[0] = np.nan
        return out

    def regular(self) -> GridFunction:
        """Fold the power terms into plain samples (values at ``j >= first``)."""
        nodal = self.nodal
        if self.singular_at_left:
            nodal[0] = 2.0 * nodal[1] - nodal[2]
        return GridFunction(self.grid, nodal, left_singular=self.singular_at_left)

    def norm(self) -> float:
        """Discrete sup norm over the nodes of :math:`J = (1, e]`."""
        return float(np.max(np.abs(self.nodal[1:])))

    def at_log(self, u: np.ndarray | float) -> np.ndarray | float:
        """Evaluate at arbitrary ``u`` by cubic interpolation of the regular part."""
        if not self._spline:
            start = 1 if self.left_singular else 0
            self._spline.append(CubicSpline(self.grid.u[start:], self.values[start:]))
        spline = self._spline[0]
        scalar = np.ndim(u) == 0
        u = np.asarray(u, dtype=float)
        out = spline(u) + self.terms_at(u)
        return float(out) if scalar else out

    def __call__(self, t: np.ndarray | float) -> np.ndarray | float:
        if np.ndim(t) == 0:
            return self.at_log(math.log(t))
        return self.at_log(np.log(np.asarray(t, dtype=float)))

    # {{{ arithmetic

    def _check(self, other: GridFunction) -> None:
        if other.grid != self.grid:
            raise ValueError("grid functions live on different grids")

    def __add__(self, other: GridFunction | float) -> GridFunction:
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(
                self.grid,
                self.values + other.values,
                self.terms + other.terms,
                self.left_singular or other.left_singular,
            )
        return GridFunction(self.grid, self.values + float(other), self.terms, self.left_singular)

    __radd__ = __add__

    def __neg__(self) -> GridFunction:
        return self * -1.0

    def __sub__(self, other: GridFunction | float) -> GridFunction:
        return self + (-other)

    def __rsub__(self, other: float) -> GridFunction:
        return (-self) + other

    def __mul__(self, scalar: float) -> GridFunction:
        scalar = float(scalar)
        return GridFunction(
            self.grid,
            self.values * scalar,
            tuple(PowerTerm(t.coef * scalar, t.power) for t in self.terms),
            self.left_singular,
        )

    __rmul__ = __mul__

    # }}}
