r"""Hadamard-type fractional operators on :math:`[1, e]`.

With :math:`u = \log t` the Hadamard integral

.. math::

    {}_H I^\alpha f(t) = \frac{1}{\Gamma(\alpha)} \int_1^t
        \left(\log \frac{t}{\tau}\right)^{\alpha - 1} f(\tau) \frac{d\tau}{\tau}

becomes an Abel convolution in :math:`u`, which is discretized with the
product-trapezoidal rule: the kernel moments over every cell are integrated
exactly against the piecewise-linear interpolant of the samples. The operator
:math:`\delta = t\,d/dt` is :math:`d/du`, applied with fourth-order finite
differences.

Exact power terms of a :class:`~hhbvp.grid.GridFunction` are mapped with the
power rules

.. math::

    {}_H I^\alpha u^p = \frac{\Gamma(p + 1)}{\Gamma(p + 1 + \alpha)} u^{p + \alpha},
    \qquad \delta\, u^p = p\, u^{p - 1}.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hhbvp.grid import Grid, GridFunction, PowerTerm
from hhbvp.special import gamma, rgamma

DEFAULT_RESOLUTION = 2048
_POWER_SNAP = 1e-12


@dataclass(frozen=True)
class FracOrder:
    """Order ``alpha`` and type ``beta`` of a Hilfer-Hadamard derivative."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"order must be positive, got {self.alpha!r}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"type must lie in [0, 1], got {self.beta!r}")

    @property
    def n(self) -> int:
        # n - 1 < alpha <= n, so integer orders are their own n
        return math.ceil(self.alpha)

    @property
    def gamma(self) -> float:
        return self.alpha + self.n * self.beta - self.alpha * self.beta


# {{{ integrals


def _check_order(order: float) -> float:
    order = float(order)
    if not order > 0:
        raise ValueError(f"fractional integral needs a positive order, got {order!r}")
    return order


def _integrate_term(term: PowerTerm, order: float) -> PowerTerm:
    if term.power <= -1.0:
        raise ValueError(f"power term u^{term.power} is not integrable at t = 1")
    scale = gamma(term.power + 1.0) * rgamma(term.power + 1.0 + order)
    power = term.power + order
    # exponents like (gamma - 2) + (2 - gamma) should land exactly on integers,
    # otherwise delta stops annihilating the resulting constant
    if abs(power - round(power)) < _POWER_SNAP:
        power = float(round(power))
    return PowerTerm(term.coef * scale, power)


def _second_difference(m: np.ndarray, p: float) -> np.ndarray:
    """``(m+1)^p - 2 m^p + (m-1)^p`` for ``m >= 1``, with less cancellation."""
    x = 1.0 / m
    return m**p * (np.expm1(p * np.log1p(x)) + np.expm1(p * np.log1p(-x)))


@lru_cache(maxsize=32)
def _trapezoid_weights(n: int, order: float) -> tuple[np.ndarray, np.ndarray]:
    """Convolution weights of the product-trapezoidal rule on ``n`` cells.

    Returns ``(c, a0)`` such that, with ``h = 1/n``,
    ``I[k] = h^order / Gamma(order + 2) * (sum_{j=1}^k c[k-j] f[j] + a0[k] f[0])``.
    """
    p = order + 1.0
    m = np.arange(n + 1, dtype=float)
    c = np.empty(n + 1)
    c[0] = 1.0
    if n >= 1:
        c[1] = 2.0**p - 2.0
        c[2:] = _second_difference(m[2:], p)
    k = m[1:]
    a0 = np.zeros(n + 1)
    a0[1:] = (k - 1.0) ** p - (k - 1.0 - order) * k**order
    c.flags.writeable = False
    a0.flags.writeable = False
    return c, a0


def _product_trapezoid(values: np.ndarray, order: float) -> np.ndarray:
    n = values.size - 1
    c, a0 = _trapezoid_weights(n, order)
    acc = np.convolve(c, values[1:])[:n]
    out = np.zeros(n + 1)
    out[1:] = acc + a0[1:] * values[0]
    return out * (1.0 / n) ** order * rgamma(order + 2.0)


def _kernel_moments(
    upper: float, left: np.ndarray, right: np.ndarray, order: float
) -> tuple[np.ndarray, np.ndarray]:
    """Moments of ``(upper - s)^(order-1) / Gamma(order)`` on cells ``[left, right]``.

    Returns the weights multiplying the left and right cell values of a
    linear interpolant.
    """
    width = right - left
    w0 = upper - left
    w1 = np.maximum(upper - right, 0.0)
    m0 = (w0**order - w1**order) / order
    # int (upper - s)^(order-1) (upper - s) ds over the cell
    m1 = (w0 ** (order + 1.0) - w1 ** (order + 1.0)) / (order + 1.0)
    # weight of the right value: int k(s) (s - left)/width ds = (w0 m0 - m1)/width
    wr = (w0 * m0 - m1) / width
    wl = m0 - wr
    scale = rgamma(order)
    return wl * scale, wr * scale


def hadamard_integral(
    f: Callable[[np.ndarray], np.ndarray],
    order: float,
    t: float,
    resolution: int = DEFAULT_RESOLUTION,
) -> float:
    """Hadamard fractional integral of a callable at a single point ``t``.

    The interval ``[0, log t]`` is split into ``resolution`` uniform cells
    and ``f`` is sampled (vectorized, in ``t``) at their endpoints.
    """
    order = _check_order(order)
    if not t > 1.0:
        raise ValueError(f"evaluation point must satisfy t > 1, got {t!r}")
    resolution = int(resolution)
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")

    upper = math.log(t)
    s = np.linspace(0.0, upper, resolution + 1)
    samples = np.asarray(f(np.exp(s)), dtype=float) * np.ones_like(s)
    wl, wr = _kernel_moments(upper, s[:-1], s[1:], order)
    return float(wl @ samples[:-1] + wr @ samples[1:])


def hadamard_integral_at(f: GridFunction, order: float, t: float) -> float:
    """Fractional integral of a grid function at an off-grid point ``t``.

    Whole cells below ``log t`` use the product rule; the last partial cell
    uses the linear interpolant between its two nodes, so the result is the
    exact integral of the same piecewise-linear function as the node values.
    """
    order = _check_order(order)
    if not 1.0 < t <= math.e * (1 + 1e-15):
        raise ValueError(f"evaluation point must lie in (1, e], got {t!r}")
    upper = min(math.log(t), 1.0)
    grid = f.grid
    u = grid.u
    values = f.values
    if f.left_singular and not f.terms:
        values = values.copy()
        values[0] = 2.0 * values[1] - values[2]

    k = min(int(math.floor(upper * grid.n)), grid.n - 1)
    left = u[: k + 1]
    right = np.minimum(u[1 : k + 2], upper)
    ends = values[1 : k + 2].copy()
    if right[-1] < u[k + 1]:
        frac = (upper - u[k]) * grid.n
        ends[-1] = values[k] + frac * (values[k + 1] - values[k])
    # drop a degenerate final cell when upper sits on a node
    keep = right > left
    wl, wr = _kernel_moments(upper, left[keep], right[keep], order)
    total = float(wl @ values[: k + 1][keep] + wr @ ends[keep])
    for term in f.terms:
        total += float(_integrate_term(term, order)(upper))
    return total


def hadamard_integral_grid(f: GridFunction, order: float) -> GridFunction:
    """Hadamard fractional integral of ``f`` at every grid node."""
    order = _check_order(order)
    values = f.values
    if f.left_singular and not f.terms:
        values = values.copy()
        values[0] = 2.0 * values[1] - values[2]
    out = _product_trapezoid(values, order)
    terms = tuple(_integrate_term(term, order) for term in f.terms)
    # the result of integrating a sampled singularity is regular again
    return GridFunction(f.grid, out, terms)


def _integrate_stage(f: GridFunction, order: float) -> GridFunction:
    return f if order == 0.0 else hadamard_integral_grid(f, order)


# }}}


# {{{ delta operator


@lru_cache(maxsize=64)
def _stencil(offsets: tuple[int, ...], deriv: int) -> np.ndarray:
    """Finite-difference weights for the ``deriv``-th derivative (unit spacing)."""
    k = len(offsets)
    powers = np.arange(k)[:, None]
    vander = np.asarray(offsets, dtype=float)[None, :] ** powers
    rhs = np.zeros(k)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(vander, rhs)


def _differentiate(values: np.ndarray, h: float, deriv: int) -> np.ndarray:
    # fourth-order accurate: 5 points for the first derivative, 5 central
    # or 6 one-sided points for the second
    n = values.size - 1
    width = 2
    extra = 0 if deriv == 1 else 1
    out = np.empty_like(values)
    central = _stencil(tuple(range(-width, width + 1)), deriv)
    out[width : n - width + 1] = sum(
        w * values[width + o : n - width + 1 + o]
        for o, w in zip(range(-width, width + 1), central)
    )
    size = 2 * width + 1 + extra
    for j in list(range(width)) + list(range(n - width + 1, n + 1)):
        start = min(max(j - width, 0), n + 1 - size)
        offsets = tuple(range(start - j, start - j + size))
        w = _stencil(offsets, deriv)
        out[j] = w @ values[start : start + size]
    return out / h**deriv


def _delta_term(term: PowerTerm) -> PowerTerm | None:
    if term.power == 0.0:
        return None
    return PowerTerm(term.coef * term.power, term.power - 1.0)


def delta_operator(f: GridFunction, repetitions: int = 1) -> GridFunction:
    r"""Apply :math:`\delta = t\,d/dt` ``repetitions`` times."""
    repetitions = int(repetitions)
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if f.grid.n < 4:
        raise ValueError("delta operator needs at least 4 cells")

    values = f.values
    left_singular = f.left_singular
    if left_singular:
        values = values.copy()
        values[0] = 2.0 * values[1] - values[2]
    remaining = repetitions
    while remaining > 0:
        step = 2 if remaining >= 2 else 1
        values = _differentiate(values, f.grid.h, step)
        remaining -= step

    terms = []
    for term in f.terms:
        current: PowerTerm | None = term
        for _ in range(repetitions):
            current = _delta_term(current) if current is not None else None
        if current is not None:
            terms.append(current)
    return GridFunction(f.grid, values, tuple(terms), left_singular)


# }}}


# {{{ derivatives


def _integer_order(order: float) -> int | None:
    return int(order) if float(order).is_integer() else None


def _check_derivative_order(order: float) -> float:
    order = float(order)
    if not 0.0 < order <= 2.0:
        raise ValueError(f"derivative order must lie in (0, 2], got {order!r}")
    return order


def hadamard_derivative(f: GridFunction, order: float) -> GridFunction:
    r"""Hadamard derivative :math:`\delta^n\, {}_H I^{n - \alpha} f`."""
    order = _check_derivative_order(order)
    k = _integer_order(order)
    if k is not None:
        return delta_operator(f, k)
    n = math.floor(order) + 1
    return delta_operator(hadamard_integral_grid(f, n - order), n)


def caputo_hadamard_derivative(f: GridFunction, order: float) -> GridFunction:
    r"""Caputo-Hadamard derivative :math:`{}_H I^{n - \alpha}\, \delta^n f`."""
    order = _check_derivative_order(order)
    k = _integer_order(order)
    if k is not None:
        return delta_operator(f, k)
    n = math.floor(order) + 1
    return hadamard_integral_grid(delta_operator(f, n), n - order)


def hilfer_hadamard_derivative(f: GridFunction, order: FracOrder) -> GridFunction:
    r"""Hilfer-Hadamard derivative of order ``alpha`` and type ``beta``.

    Evaluated as the composition
    :math:`{}_H I^{\beta(n-\alpha)}\, \delta^n\, {}_H I^{(n-\alpha)(1-\beta)} f`
    with zero-order stages skipped. Accuracy is limited by the finite
    differences in the middle stage; use ``N >= 64``.
    """
    n = order.n
    inner = (n - order.alpha) * (1.0 - order.beta)
    outer = order.beta * (n - order.alpha)
    g = _integrate_stage(f, inner)
    g = delta_operator(g, n)
    return _integrate_stage(g, outer)


# }}}
