"""Gamma function via the Lanczos approximation (g = 7, 9 coefficients)."""

from __future__ import annotations

import contextlib
import math
from collections.abc import Iterator

_G = 7.0
_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# multiplicative fault injected by ``gamma_fault``; 1.0 in normal operation
_fault_scale = 1.0


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _lanczos(x: float) -> float:
    # valid for x >= 0.5
    x -= 1.0
    a = _COEFFS[0]
    t = x + _G + 0.5
    for i in range(1, len(_COEFFS)):
        a += _COEFFS[i] / (x + i)
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * a


def gamma(x: float) -> float:
    """Euler's Gamma function for real ``x``.

    Uses the reflection formula for ``x < 1/2``. Raises :class:`ValueError`
    at the poles (non-positive integers).
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise ValueError(f"gamma has a pole at {x!r}")
    if x < 0.5:
        value = math.pi / (math.sin(math.pi * x) * _lanczos(1.0 - x))
    else:
        value = _lanczos(x)
    return value * _fault_scale


def rgamma(x: float) -> float:
    """Reciprocal Gamma function, ``0`` at the poles of Gamma."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / gamma(x)


@contextlib.contextmanager
def gamma_fault(scale: float) -> Iterator[None]:
    """Temporarily scale every Gamma value by ``scale``.

    Debug hook used to check that the self-test detects a corrupted Gamma.
    """
    global _fault_scale
    previous = _fault_scale
    _fault_scale = float(scale)
    try:
        yield
    finally:
        _fault_scale = previous
