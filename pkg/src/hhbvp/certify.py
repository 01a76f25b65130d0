"""Constants and hypothesis checks for the four existence results.

Each checker returns a :class:`Certificate`. Inequalities between computed
constants are decided exactly; hypotheses that quantify over a continuum
(Lipschitz bounds, growth bounds) can only be sampled, on a lattice of grid
nodes ``t`` and values ``x, y in {-10, -9.5, ..., 10}``. A checker reports
``fails`` together with a witness whenever the lattice exhibits a violation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from hhbvp.bvp import BvpConstants, Problem, compute_constants
from hhbvp.expr import Expression
from hhbvp.fraccalc import DEFAULT_RESOLUTION, hadamard_integral
from hhbvp.grid import Grid
from hhbvp.special import gamma

LATTICE = np.arange(-20, 21) * 0.5
# relative slack for sampled inequalities, absorbs rounding in f
SAMPLE_SLACK = 1e-12


class MissingInputError(ValueError):
    def __init__(self, name: str) -> None:
        super().__init__(f"missing input: {name}")
        self.name = name


class Theorem(str, enum.Enum):
    BANACH = "banach"
    BOYD_WONG = "boyd_wong"
    KRASNOSELSKII = "krasnoselskii"
    LERAY_SCHAUDER = "leray_schauder"


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class Certificate:
    theorem: Theorem
    constants: dict[str, float]
    verdict: Verdict
    notes: list[str] = field(default_factory=list)
    witness: dict[str, float] | None = None

    @property
    def holds(self) -> bool:
        return self.verdict is not Verdict.FAILS


@dataclass(frozen=True)
class CertifyOptions:
    """Sampling resolution of the checkers."""

    grid_n: int = 1024
    resolution: int = DEFAULT_RESOLUTION
    l_max: float = 1e6
    l_tol: float = 1e-9

    @property
    def t(self) -> np.ndarray:
        return Grid(self.grid_n).t


def _require(value, name: str):
    if value is None:
        raise MissingInputError(name)
    return value


def _bracket_weights(k: BvpConstants) -> tuple[float, float]:
    outer = (abs(k.gamma - 1.0) * abs(k.delta1) + abs(k.gamma - 2.0) * abs(k.delta2)) / abs(k.lam)
    inner = (abs(k.mu2) + abs(k.mu1)) / abs(k.lam)
    return outer, inner


def compute_phi(problem: Problem, constants: BvpConstants | None = None) -> float:
    r"""The bound :math:`\Phi` of the solution operator, in closed form."""
    k = constants if constants is not None else compute_constants(problem)
    a = problem.alpha
    outer, inner = _bracket_weights(k)
    logs = [math.log(z) for z in problem.zeta]
    first = math.log1p(problem.epsilon) ** a + sum(abs(n) * lz**a for n, lz in zip(problem.nu, logs))
    second = 1.0 + sum(abs(s) * lz ** (a - 1.0) for s, lz in zip(problem.sigma, logs))
    return (1.0 + outer * first) / gamma(a + 1.0) + inner * second / gamma(a)


def compute_pstar(
    problem: Problem,
    weight,
    constants: BvpConstants | None = None,
    resolution: int = DEFAULT_RESOLUTION,
) -> float:
    """The Boyd-Wong constant ``P*`` of a weight ``w(t)``, by quadrature.

    ``weight`` is an :class:`~hhbvp.expr.Expression` in ``t`` or any
    vectorized callable of ``t``.
    """
    k = constants if constants is not None else compute_constants(problem)
    w = (lambda t: weight(t=t)) if isinstance(weight, Expression) else weight
    a = problem.alpha

    def integral(order: float, t: float) -> float:
        return hadamard_integral(w, order, t, resolution)

    outer, inner = _bracket_weights(k)
    first = integral(a, 1.0 + problem.epsilon) + sum(
        abs(n) * integral(a, z) for n, z in zip(problem.nu, problem.zeta)
    )
    second = integral(a - 1.0, math.e) + sum(
        abs(s) * integral(a - 1.0, z) for s, z in zip(problem.sigma, problem.zeta)
    )
    return integral(a, math.e) + outer * first + inner * second


# {{{ lattice sampling


def _pairs(nonnegative: bool) -> tuple[np.ndarray, np.ndarray]:
    values = LATTICE[LATTICE >= 0] if nonnegative else LATTICE
    x, y = np.meshgrid(values, values, indexing="ij")
    mask = x != y
    return x[mask], y[mask]


def _difference_table(problem: Problem, t: np.ndarray, nonnegative: bool = False):
    x, y = _pairs(nonnegative)
    tt = t[:, None]
    diff = np.abs(problem.rhs(tt, x[None, :]) - problem.rhs(tt, y[None, :]))
    return tt, x, y, diff


def estimate_lipschitz(problem: Problem, options: CertifyOptions | None = None) -> float:
    """Largest difference quotient of ``f`` in ``x`` over the sampling lattice.

    This is a lower bound of the true Lipschitz constant, nothing more.
    """
    options = options or CertifyOptions()
    _, x, y, diff = _difference_table(problem, options.t)
    return float(np.max(diff / np.abs(x - y)[None, :]))


def _witness(t: np.ndarray, x: np.ndarray, y: np.ndarray | None, index) -> dict[str, float]:
    i, j = index
    out = {"t": float(t[i, 0] if t.ndim == 2 else t[i]), "x": float(x[j])}
    if y is not None:
        out["y"] = float(y[j])
    return out


# }}}


def certify_banach(problem: Problem, options: CertifyOptions | None = None) -> Certificate:
    """Contraction check: ``C * Phi < 1`` plus the invariant ball radius."""
    options = options or CertifyOptions()
    c = _require(problem.lipschitz, "C")
    k = compute_constants(problem)
    phi = compute_phi(problem, k)
    t = options.t
    p = float(np.max(np.abs(problem.rhs(t, np.zeros_like(t)))))
    constants = {"Phi": phi, "C": c, "C_Phi": c * phi, "P": p}
    notes = ["Lipschitz constant user-supplied, not verified analytically"]
    verdict = Verdict.HOLDS if c * phi < 1.0 else Verdict.FAILS
    if verdict is Verdict.HOLDS:
        constants["r"] = phi * p / (1.0 - c * phi)
    else:
        notes.append("C * Phi >= 1: the contraction condition is not met")

    tt, x, y, diff = _difference_table(problem, t)
    excess = diff - c * np.abs(x - y)[None, :] * (1.0 + SAMPLE_SLACK)
    witness = None
    if np.max(excess) > 0:
        witness = _witness(tt, x, y, np.unravel_index(np.argmax(excess), excess.shape))
        notes.append("sampled Lipschitz quotient exceeds C")
        verdict = Verdict.FAILS
    constants["sampled_lipschitz"] = estimate_lipschitz(problem, options)
    return Certificate(Theorem.BANACH, constants, verdict, notes, witness)


def certify_boyd_wong(problem: Problem, options: CertifyOptions | None = None) -> Certificate:
    """Nonlinear-contraction check with ``Psi(s) = P* s / (P* + s)``.

    The hypothesis on ``f`` is sampled twice: for ``x, y >= 0`` (the domain
    in the theorem statement) and for all lattice values; the verdict
    follows the first, the second is reported in the notes.
    """
    options = options or CertifyOptions()
    w = _require(problem.weight, "weight")
    k = compute_constants(problem)
    pstar = compute_pstar(problem, w, k, options.resolution)
    t = options.t
    constants = {"P_star": pstar, "Phi": compute_phi(problem, k)}
    notes = ["Boyd-Wong bound on f sampled on a lattice; verdict is heuristic"]

    w_t = np.asarray(w(t=t), dtype=float) * np.ones_like(t)
    if np.any(w_t < 0):
        notes.append("weight takes negative values on the grid")
        return Certificate(Theorem.BOYD_WONG, constants, Verdict.FAILS, notes)
    if pstar <= 0:
        notes.append("P* = 0: Psi degenerates; only f independent of x can satisfy the bound")

    witness = None
    verdict = Verdict.HEURISTIC
    for nonnegative in (True, False):
        tt, x, y, diff = _difference_table(problem, t, nonnegative)
        gap = np.abs(x - y)[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            bound = w_t[:, None] * gap / (pstar + gap)
        excess = diff - bound * (1.0 + SAMPLE_SLACK)
        violated = bool(np.max(excess) > 0)
        label = "x, y >= 0" if nonnegative else "all x, y"
        constants[f"max_violation[{label}]"] = float(max(np.max(excess), 0.0))
        if violated:
            notes.append(f"Boyd-Wong bound violated on lattice with {label}")
            if nonnegative:
                witness = _witness(tt, x, y, np.unravel_index(np.argmax(excess), excess.shape))
                verdict = Verdict.FAILS
        else:
            notes.append(f"no Boyd-Wong bound violation found with {label}")
    return Certificate(Theorem.BOYD_WONG, constants, verdict, notes, witness)


def certify_krasnoselskii(problem: Problem, options: CertifyOptions | None = None) -> Certificate:
    """Splitting check: ``C / Gamma(alpha + 1) < 1`` and ``|f(t, x)| <= g(t)``."""
    options = options or CertifyOptions()
    c = _require(problem.lipschitz, "C")
    g = _require(problem.g, "g")
    k = compute_constants(problem)
    phi = compute_phi(problem, k)
    t = options.t
    g_t = np.asarray(g(t=t), dtype=float) * np.ones_like(t)
    g_norm = float(np.max(np.abs(g_t)))
    condition = c / gamma(problem.alpha + 1.0)
    constants = {"Phi": phi, "C": c, "C_over_Gamma": condition, "g_norm": g_norm, "r_hat": g_norm * phi}
    notes = [
        "Lipschitz constant user-supplied, not verified analytically",
        "bound |f(t, x)| <= g(t) sampled on a lattice",
        "sup norms taken over grid nodes",
    ]
    verdict = Verdict.HOLDS if condition < 1.0 else Verdict.FAILS
    if verdict is Verdict.FAILS:
        notes.append("C / Gamma(alpha + 1) >= 1")

    tt = t[:, None]
    excess = np.abs(problem.rhs(tt, LATTICE[None, :])) - g_t[:, None] * (1.0 + SAMPLE_SLACK)
    witness = None
    if np.max(excess) > 0:
        witness = _witness(tt, LATTICE, None, np.unravel_index(np.argmax(excess), excess.shape))
        notes.append("bound violated: |f(t, x)| > g(t) on the lattice")
        verdict = Verdict.FAILS
    return Certificate(Theorem.KRASNOSELSKII, constants, verdict, notes, witness)


def find_growth_threshold(
    h, l_max: float = 1e6, tol: float = 1e-9, samples: int = 4000
) -> float | None:
    """Smallest ``L*`` such that ``h(L) > 0`` for all sampled ``L`` in ``(L*, l_max]``.

    Brackets on a log-spaced scan, then bisects to ``tol``. Returns ``0``
    when ``h`` is positive on the whole scan and ``None`` when ``h(l_max) <= 0``.
    """
    grid = np.geomspace(1e-12, l_max, samples)
    values = np.array([h(v) for v in grid])
    if values[-1] <= 0:
        return None
    bad = np.nonzero(values <= 0)[0]
    if bad.size == 0:
        return 0.0
    lo, hi = grid[bad[-1]], grid[bad[-1] + 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def certify_leray_schauder(problem: Problem, options: CertifyOptions | None = None) -> Certificate:
    """Growth-bound check: find ``L`` with ``L > ||q|| vartheta(L) Phi``."""
    options = options or CertifyOptions()
    q = _require(problem.q, "q")
    vartheta = _require(problem.vartheta, "vartheta")
    k = compute_constants(problem)
    phi = compute_phi(problem, k)
    t = options.t
    q_t = np.asarray(q(t=t), dtype=float) * np.ones_like(t)
    q_norm = float(np.max(np.abs(q_t)))
    constants = {"Phi": phi, "q_norm": q_norm}
    notes = ["growth bound |f(t, x)| <= q(t) vartheta(|x|) sampled on a lattice", "sup norms taken over grid nodes"]
    verdict = Verdict.HOLDS
    witness = None

    probe = np.concatenate([np.linspace(0.0, 10.0, 201), np.geomspace(10.0, options.l_max, 200)])
    theta = np.asarray(vartheta(u=probe), dtype=float) * np.ones_like(probe)
    if np.any(np.diff(theta) < -SAMPLE_SLACK * np.abs(theta[1:])):
        notes.append("vartheta is not nondecreasing on the searched range")
        verdict = Verdict.FAILS

    tt = t[:, None]
    lat = LATTICE[None, :]
    excess = np.abs(problem.rhs(tt, lat)) - (
        q_t[:, None] * np.asarray(vartheta(u=np.abs(lat)), dtype=float)
    ) * (1.0 + SAMPLE_SLACK)
    if np.max(excess) > 0:
        witness = _witness(tt, LATTICE, None, np.unravel_index(np.argmax(excess), excess.shape))
        notes.append("growth bound violated: |f(t, x)| > q(t) vartheta(|x|) on the lattice")
        verdict = Verdict.FAILS

    def h(level: float) -> float:
        return level - q_norm * float(vartheta(u=level)) * phi

    threshold = find_growth_threshold(h, options.l_max, options.l_tol)
    if threshold is None:
        notes.append(f"no admissible L in (0, {options.l_max:g}]")
        verdict = Verdict.FAILS
    else:
        constants["L_star"] = float(threshold)
    return Certificate(Theorem.LERAY_SCHAUDER, constants, verdict, notes, witness)


CHECKERS = {
    Theorem.BANACH: certify_banach,
    Theorem.BOYD_WONG: certify_boyd_wong,
    Theorem.KRASNOSELSKII: certify_krasnoselskii,
    Theorem.LERAY_SCHAUDER: certify_leray_schauder,
}


def available_theorems(problem: Problem) -> list[Theorem]:
    """Theorems whose inputs are present in ``problem``."""
    out = []
    if problem.lipschitz is not None:
        out.append(Theorem.BANACH)
    if problem.weight is not None:
        out.append(Theorem.BOYD_WONG)
    if problem.lipschitz is not None and problem.g is not None:
        out.append(Theorem.KRASNOSELSKII)
    if problem.q is not None and problem.vartheta is not None:
        out.append(Theorem.LERAY_SCHAUDER)
    return out
