import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hhbvp.special import gamma, gamma_fault, rgamma


@pytest.mark.parametrize("n", range(1, 15))
def test_factorials(n):
    assert gamma(n) == pytest.approx(math.factorial(n - 1), rel=1e-14)


def test_half_integer():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma(2.5) == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-14)


@given(st.floats(min_value=0.05, max_value=30.0))
def test_matches_math_gamma_positive(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


@given(st.floats(min_value=-8.0, max_value=0.0).filter(lambda x: abs(x - round(x)) > 1e-3))
def test_reflection_for_negative_arguments(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-11)


@pytest.mark.parametrize("x", [0.0, -1.0, -5.0])
def test_poles(x):
    with pytest.raises(ValueError, match="pole"):
        gamma(x)
    assert rgamma(x) == 0.0


def test_rgamma_is_reciprocal():
    assert rgamma(3.7) * gamma(3.7) == pytest.approx(1.0, rel=1e-15)


def test_fault_hook_scales_and_restores():
    base = gamma(2.5)
    with gamma_fault(1.5):
        assert gamma(2.5) == pytest.approx(1.5 * base, rel=1e-15)
    assert gamma(2.5) == base
