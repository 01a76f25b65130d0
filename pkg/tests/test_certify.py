import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from oracles import mp_constants, mp_growth_threshold, problem_data

from hhbvp.bvp import Problem, compute_constants
from hhbvp.certify import (
    CertifyOptions,
    MissingInputError,
    Theorem,
    Verdict,
    available_theorems,
    certify_banach,
    certify_boyd_wong,
    certify_krasnoselskii,
    certify_leray_schauder,
    compute_phi,
    compute_pstar,
    estimate_lipschitz,
    find_growth_threshold,
)
from hhbvp.expr import Expression
from hhbvp.reference import EXAMPLE_41_REFERENCE, EXAMPLE_42_REFERENCE, example_41, example_42

T = frozenset({"t"})
U = frozenset({"u"})
FAST = CertifyOptions(grid_n=128, resolution=512)


def with_(problem, **changes):
    for key in ("g", "q", "weight"):
        if isinstance(changes.get(key), str):
            changes[key] = Expression.parse(changes[key], allowed=T)
    if isinstance(changes.get("vartheta"), str):
        changes["vartheta"] = Expression.parse(changes["vartheta"], allowed=U)
    if isinstance(changes.get("f"), str):
        changes["f"] = Expression.parse(changes["f"])
    return replace(problem, **changes)


def random_problem(rng):
    m = int(rng.integers(0, 4))
    return Problem(
        alpha=float(rng.uniform(1.05, 2.0)),
        beta=float(rng.uniform(0.0, 1.0)),
        epsilon=float(rng.uniform(0.05, 0.95)),
        zeta=tuple(rng.uniform(1.05, 2.65, size=m)),
        nu=tuple(rng.uniform(-2.0, 2.0, size=m)),
        sigma=tuple(rng.uniform(-2.0, 2.0, size=m)),
        f=Expression.parse("0"),
    )


# {{{ Phi and P*


@pytest.mark.parametrize("factory", [example_41, example_42])
def test_phi_matches_high_precision_oracle(factory):
    p = factory()
    assert compute_phi(p) == pytest.approx(mp_constants(**problem_data(p))["Phi"], rel=1e-13)


def test_example_41_phi_and_contraction_constant():
    p = example_41()
    phi = compute_phi(p)
    assert phi == pytest.approx(EXAMPLE_41_REFERENCE["Phi"], abs=1e-4)
    assert p.lipschitz * phi == pytest.approx(EXAMPLE_41_REFERENCE["C_Phi"], abs=1e-6)


def test_example_42_phi_to_published_digits():
    # agreement is 6.6e-6; the published value carries rounding of the
    # intermediate constants (see README)
    assert compute_phi(example_42()) == pytest.approx(EXAMPLE_42_REFERENCE["Phi"], abs=1e-5)


def test_pstar_of_unit_weight_is_phi():
    rng = np.random.default_rng(7)
    problems = [example_41(), example_42()] + [random_problem(rng) for _ in range(20)]
    one = Expression.parse("1", allowed=T)
    for p in problems:
        assert compute_pstar(p, one) == pytest.approx(compute_phi(p), rel=1e-8)


def test_pstar_against_adaptive_quadrature():
    p = example_42()
    k = compute_constants(p)
    mpmath.mp.dps = 30

    def integral(order, x):
        x = mpmath.mpf(x)
        f = lambda s: mpmath.log(x / s) ** (order - 1) * (mpmath.sqrt(s) + mpmath.log(s)) / s
        return mpmath.quad(f, [1, x]) / mpmath.gamma(order)

    a = p.alpha
    outer = (abs(k.gamma - 1) * abs(k.delta1) + abs(k.gamma - 2) * abs(k.delta2)) / abs(k.lam)
    inner = (abs(k.mu2) + abs(k.mu1)) / abs(k.lam)
    first = integral(a, 1 + p.epsilon) + sum(abs(n) * integral(a, z) for n, z in zip(p.nu, p.zeta))
    second = integral(a - 1, math.e) + sum(abs(s) * integral(a - 1, z) for s, z in zip(p.sigma, p.zeta))
    exact = float(integral(a, math.e) + outer * first + inner * second)
    weight = Expression.parse("sqrt(t) + log(t)", allowed=T)
    assert compute_pstar(p, weight, resolution=4096) == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("factory", [example_41, example_42])
def test_phi_monotone_in_weight_magnitudes_for_fixed_constants(factory):
    p = factory()
    k = compute_constants(p)
    base = compute_phi(p, k)
    for name in ("nu", "sigma"):
        for i in range(len(p.zeta)):
            values = list(getattr(p, name))
            values[i] *= 1.5
            assert compute_phi(replace(p, **{name: tuple(values)}), k) >= base


def test_phi_not_monotone_once_constants_follow_the_weights():
    # the weights also enter mu, delta and lambda, with their signs
    p = example_41()
    bigger = replace(p, sigma=(p.sigma[0] * 1.5, p.sigma[1]))
    assert compute_phi(bigger) < compute_phi(p)


# }}}


# {{{ Banach


def test_banach_example_41():
    cert = certify_banach(example_41(), FAST)
    assert cert.verdict is Verdict.HOLDS
    assert cert.constants["C_Phi"] == pytest.approx(0.06613554378, abs=1e-6)
    assert cert.constants["P"] == 0.0 and cert.constants["r"] == 0.0


def test_banach_verdict_flips_at_one():
    p = example_41()
    phi = compute_phi(p)
    below = certify_banach(replace(p, lipschitz=(1 - 1e-6) / phi), FAST)
    above = certify_banach(replace(p, lipschitz=(1 + 1e-6) / phi), FAST)
    assert below.verdict is Verdict.HOLDS
    assert above.verdict is Verdict.FAILS


def test_banach_detects_understated_constant():
    cert = certify_banach(replace(example_41(), lipschitz=1e-4), FAST)
    assert cert.verdict is Verdict.FAILS
    assert set(cert.witness) == {"t", "x", "y"}


def test_banach_radius():
    p = with_(example_41(), f="(1 + x/2)/10", lipschitz=0.05)
    cert = certify_banach(p, FAST)
    phi = cert.constants["Phi"]
    assert cert.constants["P"] == pytest.approx(0.1)
    assert cert.constants["r"] == pytest.approx(phi * 0.1 / (1 - 0.05 * phi))


def test_banach_needs_c():
    with pytest.raises(MissingInputError, match="missing input: C"):
        certify_banach(example_42(), FAST)


# }}}


# {{{ Lipschitz estimate


@pytest.mark.parametrize("f, expected", [("x/2", 0.5), ("3", 0.0), ("t*sin(0)", 0.0)])
def test_lipschitz_estimate_simple(f, expected):
    p = with_(example_41(), f=f)
    assert estimate_lipschitz(p, FAST) == pytest.approx(expected, abs=1e-15)


def test_lipschitz_estimate_below_published_bound():
    p = example_41()
    assert estimate_lipschitz(p, FAST) <= 3 / (64 * math.e) + 1e-6


# }}}


# {{{ Boyd-Wong


def test_boyd_wong_zero_nonlinearity():
    cert = certify_boyd_wong(with_(example_41(), f="0", weight="1"), FAST)
    assert cert.verdict is Verdict.HEURISTIC
    assert cert.constants["P_star"] == pytest.approx(cert.constants["Phi"], rel=1e-8)


def test_boyd_wong_linear_nonlinearity_violates():
    cert = certify_boyd_wong(with_(example_41(), f="x", weight="1"), FAST)
    assert cert.verdict is Verdict.FAILS
    assert cert.witness is not None


def test_boyd_wong_reports_both_domains():
    # only negative arguments break the bound
    cert = certify_boyd_wong(with_(example_41(), f="10*min(x, 0)", weight="1"), FAST)
    assert cert.verdict is Verdict.HEURISTIC
    assert cert.constants["max_violation[x, y >= 0]"] == 0.0
    assert cert.constants["max_violation[all x, y]"] > 0.0
    assert any("all x, y" in n and "violated" in n for n in cert.notes)


def test_boyd_wong_rejects_negative_weight():
    cert = certify_boyd_wong(with_(example_41(), weight="-1"), FAST)
    assert cert.verdict is Verdict.FAILS


# }}}


# {{{ Krasnoselskii


def test_krasnoselskii_fails_for_large_c():
    p = with_(example_41(), g="1", lipschitz=2 * math.gamma(2.5))
    assert certify_krasnoselskii(p, FAST).verdict is Verdict.FAILS


def test_krasnoselskii_trivial_problem():
    cert = certify_krasnoselskii(with_(example_41(), f="0", g="0"), FAST)
    assert cert.verdict is Verdict.HOLDS
    assert cert.constants["r_hat"] == 0.0


def test_krasnoselskii_example_41_with_natural_bound():
    g = "(sqrt(t) + 2*log(t)) / (2*exp(t)*(3 + t)^2)"
    cert = certify_krasnoselskii(with_(example_41(), g=g), FAST)
    assert cert.verdict is Verdict.HOLDS
    assert cert.constants["r_hat"] == pytest.approx(cert.constants["g_norm"] * cert.constants["Phi"])


def test_krasnoselskii_detects_bound_violation():
    cert = certify_krasnoselskii(with_(example_41(), g="0"), FAST)
    assert cert.verdict is Verdict.FAILS and cert.witness is not None


# }}}


# {{{ Leray-Schauder


def test_leray_schauder_example_42_matches_oracle():
    p = example_42()
    cert = certify_leray_schauder(p)
    assert cert.verdict is Verdict.HOLDS
    assert cert.constants["q_norm"] == 2.0
    exact_phi = mp_constants(**problem_data(p))["Phi"]
    assert cert.constants["L_star"] == pytest.approx(mp_growth_threshold(2.0, exact_phi), abs=1e-8)


def test_leray_schauder_example_42_published_digits():
    # the published threshold follows from the rounded Phi; 5.9e-6 apart
    assert certify_leray_schauder(example_42()).constants["L_star"] == pytest.approx(1.320578171, abs=1e-5)


def test_bisection_brackets_the_threshold():
    p = example_42()
    cert = certify_leray_schauder(p)
    star = cert.constants["L_star"]
    phi, q = cert.constants["Phi"], cert.constants["q_norm"]

    def h(level):
        return level - q * (level + 1) / 12 * phi

    assert h(star - 1e-6) <= 0 <= h(star + 1e-6)


def test_zero_growth_admits_every_level():
    cert = certify_leray_schauder(with_(example_42(), f="0", vartheta="0"), FAST)
    assert cert.verdict is Verdict.HOLDS and cert.constants["L_star"] == 0.0


def test_linear_growth_dominating():
    # ||q|| Phi >= 1 with vartheta(u) = u leaves no admissible L
    cert = certify_leray_schauder(with_(example_42(), f="0", vartheta="u"), FAST)
    assert cert.verdict is Verdict.FAILS
    assert "L_star" not in cert.constants


def test_decreasing_vartheta_is_flagged():
    cert = certify_leray_schauder(with_(example_42(), f="0", vartheta="1/(1 + u)"), FAST)
    assert cert.verdict is Verdict.FAILS
    assert any("nondecreasing" in n for n in cert.notes)


def test_growth_bound_violation():
    cert = certify_leray_schauder(with_(example_42(), q="0.001"), FAST)
    assert cert.verdict is Verdict.FAILS and cert.witness is not None


@pytest.mark.parametrize("missing", ["q", "vartheta"])
def test_leray_schauder_missing_inputs(missing):
    with pytest.raises(MissingInputError, match=missing):
        certify_leray_schauder(replace(example_42(), **{missing: None}), FAST)


def test_find_growth_threshold_edge_cases():
    assert find_growth_threshold(lambda L: L - 3.0) == pytest.approx(3.0, abs=1e-9)
    assert find_growth_threshold(lambda L: -1.0) is None
    assert find_growth_threshold(lambda L: 1.0) == 0.0


# }}}


def test_available_theorems():
    assert available_theorems(example_41()) == [Theorem.BANACH]
    assert available_theorems(example_42()) == [Theorem.LERAY_SCHAUDER]
    full = with_(example_41(), g="1", weight="1")
    assert available_theorems(full) == [Theorem.BANACH, Theorem.BOYD_WONG, Theorem.KRASNOSELSKII]
