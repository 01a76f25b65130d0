"""Command line interface: ``hhbvp {constants,certify,solve,selftest}``.

Exit codes:

    0  success
    1  invalid input (problem file, flags, missing checker inputs, lambda = 0)
    2  a requested check failed (certificate verdict ``fails``, selftest failure)
    3  Picard iteration did not converge
    4  internal error
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import os
import sys
from pathlib import Path

from hhbvp import __version__
from hhbvp.bvp import ProblemError, compute_constants
from hhbvp.certify import (
    CHECKERS,
    CertifyOptions,
    MissingInputError,
    Theorem,
    Verdict,
    available_theorems,
    compute_phi,
)
from hhbvp.expr import ExprError
from hhbvp.grid import MIN_NODES, Grid
from hhbvp.problemfile import ProblemFile, ProblemFileError, load_problem
from hhbvp.report import format_number, render_text, to_json
from hhbvp.selftest import run_selftest
from hhbvp.solver import DEFAULT_MAX_ITER, DEFAULT_TOL, picard_solve, verify_solution
from hhbvp.special import gamma_fault

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2
EXIT_NOT_CONVERGED = 3
EXIT_INTERNAL = 4

DEFAULT_GRID_N = 1024
GRID_ENV = "HHBVP_DEFAULT_N"


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse would exit with 2, which is reserved for failed checks
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# {{{ settings


def _default_grid_n() -> int:
    raw = os.environ.get(GRID_ENV)
    if raw is None:
        return DEFAULT_GRID_N
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{GRID_ENV} must be an integer, got {raw!r}") from None
    if n < MIN_NODES:
        raise UsageError(f"{GRID_ENV} must be at least {MIN_NODES}, got {n}")
    return n


def _pick(flag, from_file, default):
    if flag is not None:
        return flag
    return from_file if from_file is not None else default


def _resolved_settings(args, pf: ProblemFile) -> dict:
    s = pf.settings
    options = CertifyOptions()
    return {
        "grid_n": _pick(args.grid_n, s.grid_n, None) or _default_grid_n(),
        "resolution": _pick(args.resolution, s.resolution, options.resolution),
        "tol": _pick(args.tol, s.tol, DEFAULT_TOL),
        "max_iter": _pick(args.max_iter, s.max_iter, DEFAULT_MAX_ITER),
        "l_max": _pick(args.l_max, None, options.l_max),
        "l_tol": _pick(args.l_tol, None, options.l_tol),
    }


def _parse_theorems(text: str | None) -> list[Theorem] | None:
    if text is None:
        return None
    names = [name.strip() for name in text.split(",") if name.strip()]
    known = {t.value: t for t in Theorem}
    unknown = [name for name in names if name not in known]
    if unknown or not names:
        raise UsageError(
            f"unknown theorem(s) {', '.join(unknown) or '(none given)'}; "
            f"choose from {', '.join(known)}"
        )
    return [known[name] for name in names]


# }}}


# {{{ commands


def _input_section(args, pf: ProblemFile, settings: dict) -> dict:
    return {"file": str(args.file), "entries": dict(pf.entries), "settings": settings}


def _certificate_dict(cert) -> dict:
    out = {"theorem": cert.theorem.value, "verdict": cert.verdict.value, "constants": cert.constants}
    out["notes"] = list(cert.notes)
    if cert.witness is not None:
        out["witness"] = cert.witness
    return out


def cmd_constants(args) -> tuple[dict, int]:
    pf = load_problem(args.file)
    settings = _resolved_settings(args, pf)
    k = compute_constants(pf.problem)
    constants = dict(k.as_dict(), Phi=compute_phi(pf.problem, k))
    if pf.problem.lipschitz is not None:
        constants["C_Phi"] = pf.problem.lipschitz * constants["Phi"]
    doc = {
        "command": "constants",
        "input": _input_section(args, pf, settings),
        "constants": constants,
    }
    return doc, EXIT_OK


def cmd_certify(args) -> tuple[dict, int]:
    pf = load_problem(args.file)
    settings = _resolved_settings(args, pf)
    requested = _parse_theorems(args.theorems)
    theorems = requested if requested is not None else available_theorems(pf.problem)
    if not theorems:
        raise UsageError("no checker has its inputs; supply C, g, weight or q and vartheta")
    options = CertifyOptions(
        grid_n=settings["grid_n"],
        resolution=settings["resolution"],
        l_max=settings["l_max"],
        l_tol=settings["l_tol"],
    )
    certificates = [CHECKERS[t](pf.problem, options) for t in theorems]
    k = compute_constants(pf.problem)
    doc = {
        "command": "certify",
        "input": _input_section(args, pf, settings),
        "constants": dict(k.as_dict(), Phi=compute_phi(pf.problem, k)),
        "certificates": [_certificate_dict(c) for c in certificates],
    }
    failed = any(c.verdict is Verdict.FAILS for c in certificates)
    return doc, EXIT_CHECK_FAILED if failed else EXIT_OK


def _write_csv(path: str, x) -> None:
    grid = x.grid
    nodal = x.nodal
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "u", "x"])
        for j in range(1, grid.n + 1):
            writer.writerow([format_number(grid.t[j]), format_number(grid.u[j]), format_number(nodal[j])])


def cmd_solve(args) -> tuple[dict, int]:
    pf = load_problem(args.file)
    settings = _resolved_settings(args, pf)
    problem = pf.problem
    grid = Grid(settings["grid_n"])
    sol = picard_solve(problem, tol=settings["tol"], max_iter=settings["max_iter"], grid=grid)

    certified = False
    if problem.lipschitz is not None:
        certified = problem.lipschitz * compute_phi(problem) < 1.0
    solution = {
        "status": sol.status,
        "converged": sol.converged,
        "certification": "contraction (C * Phi < 1)" if certified else "uncertified run",
        "iterations": sol.iterations,
        "step_norms": list(sol.step_norms),
        "ratios": list(sol.ratios),
        "max_ratio": sol.max_ratio,
        "ratio_bound": sol.ratio_bound,
        "ratios_within_bound": sol.ratios_within_bound,
        "sup_norm": sol.x.norm(),
        "x_at_e": float(sol.x.nodal[-1]),
    }
    doc = {"command": "solve", "input": _input_section(args, pf, settings), "solution": solution}
    if sol.converged:
        res = verify_solution(problem, sol.x)
        doc["residuals"] = {
            "ode": res.ode,
            "boundary_1": res.r1,
            "boundary_2": res.r2,
            "excluded_nodes": res.excluded,
        }
    if args.csv is not None:
        _write_csv(args.csv, sol.x)
    return doc, EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def cmd_selftest(args) -> tuple[dict, int]:
    checks = run_selftest(quick=args.quick)
    failed = [c.name for c in checks if not c.passed]
    doc = {
        "command": "selftest",
        "mode": "quick" if args.quick else "full",
        "checks": [c.as_dict() for c in checks],
        "passed": not failed,
        "failed": failed,
    }
    return doc, EXIT_CHECK_FAILED if failed else EXIT_OK


COMMANDS = {
    "constants": cmd_constants,
    "certify": cmd_certify,
    "solve": cmd_solve,
    "selftest": cmd_selftest,
}

# }}}


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the machine report here ('-' for stdout)")
    common.add_argument("--inject-gamma-fault", type=float, metavar="SCALE", help=argparse.SUPPRESS)

    numeric = _ArgumentParser(add_help=False)
    numeric.add_argument("file", type=Path, help="problem file")
    numeric.add_argument("--grid-n", type=int, metavar="N", help=f"grid cells (default ${GRID_ENV} or 1024)")
    numeric.add_argument("--resolution", type=int, metavar="M", help="quadrature cells for pointwise integrals")
    numeric.add_argument("--tol", type=float, help="Picard step tolerance")
    numeric.add_argument("--max-iter", type=int, metavar="K", help="Picard iteration cap")
    numeric.add_argument("--l-max", type=float, help="upper end of the Leray-Schauder search")
    numeric.add_argument("--l-tol", type=float, help="bisection tolerance of that search")

    parser = _ArgumentParser(
        prog="hhbvp",
        description="Solve and certify Hilfer-Hadamard nonlocal boundary value problems on (1, e].",
        epilog="exit codes: 0 ok, 1 invalid input, 2 check failed, 3 not converged, 4 internal error",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common, numeric], help="boundary constants and Phi")
    p = sub.add_parser("certify", parents=[common, numeric], help="run existence checkers")
    p.add_argument("--theorems", help="comma list of banach, boyd_wong, krasnoselskii, leray_schauder")
    p = sub.add_parser("solve", parents=[common, numeric], help="Picard iteration and residuals")
    p.add_argument("--csv", metavar="PATH", help="write t,u,x for nodes j >= 1")
    p = sub.add_parser("selftest", parents=[common], help="identity suite and reference constants")
    p.add_argument("--quick", action="store_true", help="coarse grid (N=128), looser tolerances")
    return parser


def _check_flags(args) -> None:
    if getattr(args, "grid_n", None) is not None and args.grid_n < MIN_NODES:
        raise UsageError(f"--grid-n must be at least {MIN_NODES}")
    for name in ("resolution", "max_iter"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    for name in ("tol", "l_max", "l_tol"):
        value = getattr(args, name, None)
        if value is not None and not value > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")


def _emit(doc: dict, json_path: str | None) -> None:
    machine = to_json(doc) + "\n"
    if json_path == "-":
        sys.stdout.write(machine)
        return
    if json_path is not None:
        Path(json_path).write_text(machine, encoding="utf-8")
    sys.stdout.write(render_text(doc) + "\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fault = (
        gamma_fault(args.inject_gamma_fault)
        if args.inject_gamma_fault is not None
        else contextlib.nullcontext()
    )
    try:
        _check_flags(args)
        with fault:
            doc, code = COMMANDS[args.command](args)
    except (UsageError, ProblemFileError, ProblemError, MissingInputError, ExprError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _emit(doc, args.json)
    if code == EXIT_NOT_CONVERGED:
        trace = ", ".join(format_number(s) for s in doc["solution"]["step_norms"])
        print(f"not converged ({doc['solution']['status']}); step norms: {trace}", file=sys.stderr)
    return code
