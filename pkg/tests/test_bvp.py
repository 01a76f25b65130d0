import math

import numpy as np
import pytest
from oracles import mp_constants, problem_data

from hhbvp.bvp import (
    DegenerateProblemError,
    Problem,
    ProblemError,
    apply_rho,
    boundary_residual,
    compute_constants,
    linear_solution,
    sample_forcing,
)
from hhbvp.certify import compute_phi
from hhbvp.expr import Expression
from hhbvp.fraccalc import hilfer_hadamard_derivative
from hhbvp.grid import Grid, GridFunction
from hhbvp.reference import EXAMPLE_41_REFERENCE, EXAMPLE_42_REFERENCE, example_41, example_42
from hhbvp.solver import interior_start


def make(f="0", **overrides):
    data = dict(alpha=1.5, beta=0.5, epsilon=0.3, zeta=(1.5, 1.75), nu=(0.5, -0.75), sigma=(2 / 3, 4 / 3))
    data.update(overrides)
    return Problem(f=Expression.parse(f), **data)


# {{{ validation


@pytest.mark.parametrize(
    "overrides, key",
    [
        (dict(alpha=1.0), "alpha"),
        (dict(alpha=2.5), "alpha"),
        (dict(beta=-0.1), "beta"),
        (dict(beta=1.1), "beta"),
        (dict(epsilon=0.0), "epsilon"),
        (dict(epsilon=1.0), "epsilon"),
        (dict(zeta=(1.5,)), "zeta"),
        (dict(zeta=(1.0, 2.0)), "zeta"),
        (dict(zeta=(1.5, math.e)), "zeta"),
        (dict(lipschitz=-1.0), "C"),
    ],
)
def test_invalid_problems_name_the_field(overrides, key):
    with pytest.raises(ProblemError) as info:
        make(**overrides)
    assert info.value.key == key


def test_alpha_two_and_unordered_points_are_accepted():
    make(alpha=2.0)
    make(zeta=(1.75, 1.5))


def test_empty_weight_lists():
    p = make(zeta=(), nu=(), sigma=())
    k = compute_constants(p)
    le = math.log(1.3)
    assert k.delta1 == 1.0 and k.delta2 == 1.0
    assert k.mu1 == pytest.approx(le**0.75) and k.mu2 == pytest.approx(le**-0.25)


def test_degenerate_boundary_system():
    # zeta = 1 + eps with weight 1 makes both rows of the first condition vanish
    p = make(zeta=(1.3,), nu=(1.0,), sigma=(0.0,))
    with pytest.raises(DegenerateProblemError) as info:
        compute_constants(p)
    assert abs(info.value.lam) < 1e-12


# }}}


# {{{ constants


@pytest.mark.parametrize("factory, reference", [(example_41, EXAMPLE_41_REFERENCE), (example_42, EXAMPLE_42_REFERENCE)])
def test_constants_match_high_precision_oracle(factory, reference):
    p = factory()
    exact = mp_constants(**problem_data(p))
    k = compute_constants(p).as_dict()
    for name in ("gamma", "mu1", "mu2", "delta1", "delta2", "lambda"):
        assert k[name] == pytest.approx(exact[name], rel=1e-13, abs=1e-15)
        assert k[name] == pytest.approx(reference[name], abs=1e-4)


def test_example_41_gamma_is_exact():
    assert compute_constants(example_41()).gamma == 1.75


# }}}


# {{{ linear solution


def smooth_forcing(grid):
    return GridFunction.from_callable(grid, lambda t: np.cos(t) + np.log(t) ** 2)


@pytest.mark.parametrize("factory", [example_41, example_42])
def test_coefficients_solve_the_boundary_system(factory):
    p = factory()
    k = compute_constants(p)
    _, d = linear_solution(p, smooth_forcing(Grid(256)), k)
    g = k.gamma
    row1 = d.c0 * k.mu1 + d.c1 * k.mu2
    row2 = d.c0 * (g - 1) * k.delta1 + d.c1 * (g - 2) * k.delta2
    assert row1 == pytest.approx(d.first_bracket, rel=1e-12)
    assert row2 == pytest.approx(d.second_bracket, rel=1e-12)


@pytest.mark.parametrize("factory", [example_41, example_42])
def test_boundary_residuals_shrink_quadratically(factory):
    p = factory()
    res = []
    for n in (256, 512, 1024):
        x, _ = linear_solution(p, smooth_forcing(Grid(n)))
        res.append(np.abs(boundary_residual(p, x)))
    res = np.array(res)
    for row in range(2):
        r = res[:, row]
        # either second-order decay or already at rounding level
        assert all(b <= a / 3.5 or b < 1e-12 for a, b in zip(r, r[1:]))
    assert res.max() < 1e-5


def test_constant_forcing_boundary_rows_near_rounding():
    p = example_41()
    x, _ = linear_solution(p, GridFunction.constant(Grid(256), 1.0))
    r1, r2 = boundary_residual(p, x)
    assert abs(r1) < 1e-10 and abs(r2) < 1e-9


@pytest.mark.parametrize("factory", [example_41, example_42])
def test_equation_row_residual_decreases(factory):
    p = factory()
    out = []
    for n in (256, 512, 1024):
        grid = Grid(n)
        phi = smooth_forcing(grid)
        x, _ = linear_solution(p, phi)
        lhs = hilfer_hadamard_derivative(x, p.order) + phi
        out.append(np.max(np.abs(lhs.nodal[interior_start(n) :])))
    assert out[0] > out[1] > out[2]
    assert out[2] < 1e-2


def test_solution_carries_both_modes_exactly():
    p = example_42()
    k = compute_constants(p)
    x, d = linear_solution(p, GridFunction.constant(Grid(64), 1.0), k)
    powers = sorted(t.power for t in x.terms)
    assert powers == pytest.approx([k.gamma - 2.0, k.gamma - 1.0])
    assert x.singular_at_left


# }}}


# {{{ operator rho


def test_zero_nonlinearity_maps_everything_to_zero():
    p = make("0")
    y = GridFunction.from_log_callable(Grid(64), np.sin)
    assert apply_rho(p, y).norm() == 0.0


def test_x_independent_nonlinearity_reduces_to_linear_solution():
    p = make("cos(t) + log(t)^2")
    grid = Grid(128)
    y = GridFunction.from_log_callable(grid, lambda u: 5 * np.sin(7 * u))
    lhs = apply_rho(p, y)
    rhs, _ = linear_solution(p, smooth_forcing(grid))
    diff = lhs.nodal[1:] - rhs.nodal[1:]
    assert np.max(np.abs(diff)) <= 1e-12 * max(1.0, rhs.norm())


@pytest.mark.parametrize("factory", [example_41, example_42])
def test_image_of_zero_is_bounded_by_phi(factory):
    p = factory()
    grid = Grid(512)
    bound = compute_phi(p) * float(np.max(np.abs(p.rhs(grid.t, 0.0 * grid.t))))
    assert apply_rho(p, GridFunction.zeros(grid)).norm() <= bound * (1 + 1e-12)


def test_contraction_on_random_pairs():
    p = example_41()
    grid = Grid(256)
    c_phi = p.lipschitz * compute_phi(p)
    rng = np.random.default_rng(20261015)
    u = grid.u

    def random_ball_element():
        coef = rng.normal(size=(4,))
        freq = rng.uniform(0.5, 8.0, size=(4,))
        v = sum(c * np.sin(f * u + s) for c, f, s in zip(coef, freq, rng.uniform(0, 6, size=4)))
        v = v / np.max(np.abs(v)) * rng.uniform(0.0, 1.0)
        return GridFunction(grid, v)

    for _ in range(100):
        x, y = random_ball_element(), random_ball_element()
        gap = (x - y).norm()
        assert (apply_rho(p, x) - apply_rho(p, y)).norm() <= (c_phi + 0.01) * gap


def test_forcing_sampling_extrapolates_singular_node():
    p = make("x")
    grid = Grid(32)
    x = GridFunction.power(grid, -0.25)
    f = sample_forcing(p, x)
    assert np.all(np.isfinite(f.values))
    assert f.values[0] == pytest.approx(2 * f.values[1] - f.values[2])


# }}}
