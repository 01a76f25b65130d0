"""Reader for the flat ``key = value`` problem file format.

One assignment per line; ``#`` starts a comment; blank lines are ignored::

    alpha   = 1.5
    zeta    = [3/2, 7/4]            # arrays of constant expressions
    f       = x / (2 + abs(x))      # expression in t and x
    C       = 3/(64*e)              # numbers may be constant expressions
    weight  = "1"                   # expressions may be quoted

Keys:

=============================  ===========================================
``alpha``, ``beta``,           numbers (required)
``epsilon``
``zeta``, ``nu``, ``sigma``    arrays of equal length (required, may be ``[]``)
``f``                          expression in ``t`` and ``x`` (required)
``C``                          Lipschitz constant (number)
``g``, ``q``, ``weight``       expressions in ``t``
``vartheta``                   expression in ``u``
``grid_n``, ``resolution``,    solver settings (integers)
``max_iter``
``tol``                        solver tolerance (number)
=============================  ===========================================

Every error carries the line of the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from hhbvp.bvp import Problem, ProblemError
from hhbvp.expr import Expression, ExprError, evaluate
from hhbvp.grid import MIN_NODES

NUMBER_KEYS = ("alpha", "beta", "epsilon")
ARRAY_KEYS = ("zeta", "nu", "sigma")
REQUIRED_KEYS = NUMBER_KEYS + ARRAY_KEYS + ("f",)
EXPRESSION_KEYS = {
    "f": frozenset({"t", "x"}),
    "g": frozenset({"t"}),
    "q": frozenset({"t"}),
    "weight": frozenset({"t"}),
    "vartheta": frozenset({"u"}),
}
INTEGER_SETTINGS = {"grid_n": MIN_NODES, "resolution": 1, "max_iter": 1}
KNOWN_KEYS = frozenset(REQUIRED_KEYS) | set(EXPRESSION_KEYS) | set(INTEGER_SETTINGS) | {"C", "tol"}


class ProblemFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None) -> None:
        where = f"line {line}: " if line is not None else ""
        what = f"{key}: " if key is not None else ""
        super().__init__(f"{where}{what}{message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class Settings:
    """Solver settings read from the file; ``None`` means not given."""

    grid_n: int | None = None
    resolution: int | None = None
    tol: float | None = None
    max_iter: int | None = None


@dataclass(frozen=True)
class ProblemFile:
    problem: Problem
    settings: Settings
    entries: dict[str, str]
    lines: dict[str, int]


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _unquote(text: str) -> str:
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    if '"' in text:
        raise ValueError("unbalanced quotes")
    return text


def _split_items(body: str) -> list[str]:
    items, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            items.append(body[start:i])
            start = i + 1
    items.append(body[start:])
    if len(items) == 1 and not items[0].strip():
        return []
    return items


def _constant(text: str) -> float:
    return evaluate(Expression.parse(_unquote(text.strip()), allowed=frozenset()).tree, {})


def _array(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError("expected an array like [1.5, 7/4]")
    items = _split_items(text[1:-1])
    if any(not item.strip() for item in items):
        raise ValueError("empty array entry")
    return tuple(_constant(item) for item in items)


def _integer(text: str, minimum: int) -> int:
    value = _constant(text)
    if value != int(value) or value < minimum:
        raise ValueError(f"expected an integer >= {minimum}, got {value!r}")
    return int(value)


def parse_problem_text(text: str) -> ProblemFile:
    """Parse problem file contents."""
    raw: dict[str, str] = {}
    lines: dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        body = _strip_comment(line).strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ProblemFileError("expected 'key = value'", number)
        if key not in KNOWN_KEYS:
            raise ProblemFileError("unknown key", number, key)
        if key in raw:
            raise ProblemFileError(f"duplicate key (first set on line {lines[key]})", number, key)
        if not value:
            raise ProblemFileError("missing value", number, key)
        raw[key] = value
        lines[key] = number

    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ProblemFileError(f"missing required key(s): {', '.join(missing)}")

    values: dict[str, object] = {}
    for key, value in raw.items():
        try:
            if key in NUMBER_KEYS or key in ("C", "tol"):
                values[key] = _constant(value)
            elif key in ARRAY_KEYS:
                values[key] = _array(value)
            elif key in EXPRESSION_KEYS:
                values[key] = Expression.parse(_unquote(value), allowed=EXPRESSION_KEYS[key])
            else:
                values[key] = _integer(value, INTEGER_SETTINGS[key])
        except (ExprError, ValueError) as exc:
            raise ProblemFileError(str(exc), lines[key], key) from None

    tol = values.get("tol")
    if tol is not None and not tol > 0:
        raise ProblemFileError(f"tol must be positive, got {tol}", lines["tol"], "tol")

    try:
        problem = Problem(
            alpha=values["alpha"],
            beta=values["beta"],
            epsilon=values["epsilon"],
            zeta=values["zeta"],
            nu=values["nu"],
            sigma=values["sigma"],
            f=values["f"],
            lipschitz=values.get("C"),
            g=values.get("g"),
            q=values.get("q"),
            vartheta=values.get("vartheta"),
            weight=values.get("weight"),
        )
    except ProblemError as exc:
        raise ProblemFileError(str(exc), lines.get(exc.key), exc.key) from None

    settings = Settings(
        grid_n=values.get("grid_n"),
        resolution=values.get("resolution"),
        tol=tol,
        max_iter=values.get("max_iter"),
    )
    return ProblemFile(problem, settings, raw, lines)


def load_problem(path: str | Path) -> ProblemFile:
    """Read and parse a problem file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    return parse_problem_text(text)
