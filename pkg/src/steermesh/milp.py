"""In-memory mixed-integer linear program container and LP-format round trip.

The container is solver-agnostic: the branch-and-bound engine, the LP
relaxation engines, and the exhaustive oracle all consume the same structure.
Models always minimize. Variable names are restricted to an LP-safe charset at
creation time so exported files never need escaping.

The LP writer targets the common CPLEX-style dialect (Minimize / Subject To /
Bounds / Binaries / Generals / End) with numbers at 12 significant digits. The
bundled reader is intentionally minimal: it understands the dialect this
writer produces (plus trivial variations) and exists so tests can prove the
round trip is lossless.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

INF = math.inf

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_SENSES = ("<=", ">=", "=")

_LINE_LIMIT = 200


@dataclass
class Variable:
    index: int
    name: str
    lb: float
    ub: float
    is_integer: bool = False

    @property
    def is_binary(self) -> bool:
        return self.is_integer and self.lb >= 0 and self.ub <= 1


@dataclass
class LinearConstraint:
    name: str
    coeffs: dict[int, float]
    sense: str
    rhs: float


@dataclass
class MilpModel:
    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[LinearConstraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    objective_constant: float = 0.0
    _by_name: dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def add_variable(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = INF,
        integer: bool = False,
    ) -> int:
        if not _NAME_RE.match(name):
            raise ValueError(f"variable name {name!r} is not LP-safe")
        if name in self._by_name:
            raise ValueError(f"duplicate variable name {name!r}")
        if lb > ub:
            raise ValueError(f"variable {name}: lower bound exceeds upper bound")
        idx = len(self.variables)
        self.variables.append(Variable(idx, name, float(lb), float(ub), integer))
        self._by_name[name] = idx
        return idx

    def add_constraint(
        self,
        coeffs: dict[int, float],
        sense: str,
        rhs: float,
        name: str | None = None,
    ) -> int:
        if sense not in _SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        clean = {i: float(c) for i, c in coeffs.items() if c != 0.0}
        for i in clean:
            if not 0 <= i < len(self.variables):
                raise ValueError(f"constraint references unknown variable index {i}")
        idx = len(self.constraints)
        if name is None:
            name = f"c{idx}"
        self.constraints.append(LinearConstraint(name, clean, sense, float(rhs)))
        return idx

    def set_objective(self, coeffs: dict[int, float], constant: float = 0.0) -> None:
        self.objective = {i: float(c) for i, c in coeffs.items() if c != 0.0}
        self.objective_constant = float(constant)

    def variable_index(self, name: str) -> int:
        return self._by_name[name]

    def has_variable(self, name: str) -> bool:
        return name in self._by_name

    def objective_value(self, values: list[float]) -> float:
        return (
            sum(c * values[i] for i, c in self.objective.items())
            + self.objective_constant
        )


def validate_model(model: MilpModel) -> list[str]:
    """Structural diagnostics; an empty list means the model is well-formed."""
    problems: list[str] = []
    seen: set[str] = set()
    for var in model.variables:
        if var.name in seen:
            problems.append(f"duplicate variable name {var.name}")
        seen.add(var.name)
        if var.lb > var.ub:
            problems.append(f"variable {var.name} has lb > ub")
        if math.isnan(var.lb) or math.isnan(var.ub):
            problems.append(f"variable {var.name} has NaN bounds")
        if var.is_integer and math.isinf(var.lb) and math.isinf(var.ub):
            problems.append(f"integer variable {var.name} is unbounded both ways")
    for con in model.constraints:
        if not con.coeffs:
            problems.append(f"constraint {con.name} has no terms")
        if not math.isfinite(con.rhs):
            problems.append(f"constraint {con.name} has non-finite rhs")
        for i, c in con.coeffs.items():
            if not math.isfinite(c):
                problems.append(f"constraint {con.name} has non-finite coefficient")
            if not 0 <= i < model.num_variables:
                problems.append(f"constraint {con.name} references bad index {i}")
    for i, c in model.objective.items():
        if not 0 <= i < model.num_variables:
            problems.append(f"objective references bad index {i}")
        if not math.isfinite(c):
            problems.append("objective has non-finite coefficient")
    return problems


def _fmt(value: float) -> str:
    if not math.isfinite(value):
        return "-inf" if value < 0 else "inf"
    if value == math.floor(value) and abs(value) < 1e15:
        return str(int(value))
    return format(value, ".12g")


def _expr_tokens(model: MilpModel, coeffs: dict[int, float]) -> list[str]:
    parts: list[str] = []
    for i in sorted(coeffs):
        c = coeffs[i]
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        name = model.variables[i].name
        if mag == 1.0:
            parts.append(f"{sign} {name}")
        else:
            parts.append(f"{sign} {_fmt(mag)} {name}")
    return parts


def _wrap(prefix: str, parts: list[str], out: list[str]) -> None:
    line = prefix
    for part in parts:
        if len(line) + len(part) + 1 > _LINE_LIMIT:
            out.append(line)
            line = "   " + part
        else:
            line = f"{line} {part}"
    out.append(line)


def lp_string(model: MilpModel) -> str:
    """Serialize to LP text. The result parses back to an equivalent model."""
    out: list[str] = [f"\\ Problem: {model.name}", "Minimize"]
    obj_parts = _expr_tokens(model, model.objective)
    if model.objective_constant:
        obj_parts.append(f"+ {_fmt(model.objective_constant)}")
    if not obj_parts:
        obj_parts = ["+ 0 " + model.variables[0].name] if model.variables else []
    _wrap(" obj:", obj_parts, out)
    out.append("Subject To")
    for con in model.constraints:
        parts = _expr_tokens(model, con.coeffs)
        parts.append(con.sense.replace("==", "="))
        parts.append(_fmt(con.rhs))
        _wrap(f" {con.name}:", parts, out)
    bounds: list[str] = []
    for var in model.variables:
        lb, ub = var.lb, var.ub
        if var.is_binary and lb == 0 and ub == 1:
            continue
        if lb == 0 and ub == INF:
            continue
        if lb == ub:
            bounds.append(f" {var.name} = {_fmt(lb)}")
        elif lb == -INF and ub == INF:
            bounds.append(f" {var.name} free")
        elif ub == INF:
            bounds.append(f" {var.name} >= {_fmt(lb)}")
        elif lb == -INF:
            bounds.append(f" -inf <= {var.name} <= {_fmt(ub)}")
        else:
            bounds.append(f" {_fmt(lb)} <= {var.name} <= {_fmt(ub)}")
    if bounds:
        out.append("Bounds")
        out.extend(bounds)
    binaries = [v.name for v in model.variables if v.is_binary]
    generals = [v.name for v in model.variables if v.is_integer and not v.is_binary]
    if binaries:
        out.append("Binaries")
        for chunk in range(0, len(binaries), 8):
            out.append(" " + " ".join(binaries[chunk : chunk + 8]))
    if generals:
        out.append("Generals")
        for chunk in range(0, len(generals), 8):
            out.append(" " + " ".join(generals[chunk : chunk + 8]))
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp_file(path: str, model: MilpModel) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(lp_string(model))


_TOKEN_RE = re.compile(
    r"""
    (?P<num>[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op><=|>=|=<|=>|==|[<>=+\-*:])
    """,
    re.VERBOSE,
)

_SECTIONS = {
    "minimize": "objective",
    "min": "objective",
    "maximize": "objective_max",
    "max": "objective_max",
    "subject": "constraints",
    "st": "constraints",
    "bounds": "bounds",
    "bound": "bounds",
    "binaries": "binaries",
    "binary": "binaries",
    "bin": "binaries",
    "generals": "generals",
    "general": "generals",
    "gen": "generals",
    "end": "end",
}

_INF_NAMES = {"inf", "infinity"}


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    for raw_line in text.splitlines():
        line = raw_line.split("\\", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            match = _TOKEN_RE.match(line, pos)
            if not match:
                raise ValueError(f"cannot tokenize LP text at: {line[pos:pos+20]!r}")
            tokens.append(match.group(0))
            pos = match.end()
    return tokens


class _LpReader:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at_section(self) -> str | None:
        tok = self.peek()
        if tok is None:
            return "end"
        key = tok.lower()
        if key == "subject" or key == "such":
            nxt = self.tokens[self.pos + 1 : self.pos + 2]
            if nxt and nxt[0].lower() == "to":
                return "constraints"
            return None
        if key in ("s",):
            return None
        section = _SECTIONS.get(key)
        if section and key in ("bin", "gen", "st", "min", "max"):
            return section
        return section

    def eat_section_header(self, section: str) -> None:
        tok = self.take().lower()
        if tok in ("subject", "such"):
            self.take()
        if self.peek() == ":":
            self.take()

    def parse_number(self) -> float:
        sign = 1.0
        while self.peek() in ("+", "-"):
            if self.take() == "-":
                sign = -sign
        tok = self.take()
        if tok.lower() in _INF_NAMES:
            return sign * INF
        return sign * float(tok)

    def parse_expression(self) -> tuple[dict[str, float], float]:
        """Linear terms (by name) and accumulated constant, up to a sense token."""
        coeffs: dict[str, float] = {}
        constant = 0.0
        sign = 1.0
        pending: float | None = None
        while True:
            tok = self.peek()
            if tok is None or tok in ("<=", ">=", "=", "<", ">", "=<", "=>", "=="):
                break
            if self.at_section():
                break
            tok = self.take()
            if tok == "+":
                continue
            if tok == "-":
                sign = -sign
                continue
            if tok == "*":
                continue
            if tok[0].isdigit() or tok[0] == ".":
                value = sign * float(tok)
                if pending is not None:
                    constant += pending
                pending = value
                sign = 1.0
                continue
            # a name token: either a variable or a label already consumed
            coeff = pending if pending is not None else sign
            coeffs[tok] = coeffs.get(tok, 0.0) + coeff
            pending = None
            sign = 1.0
        if pending is not None:
            constant += pending
        return coeffs, constant


def parse_lp(text: str) -> MilpModel:
    """Parse LP text produced by `lp_string` (and close dialect variants)."""
    reader = _LpReader(_tokenize(text))
    model = MilpModel(name="parsed")
    bounds_patch: dict[str, tuple[float | None, float | None, bool]] = {}
    integer_names: list[str] = []
    binary_names: list[str] = []

    def ensure_var(name: str) -> int:
        if model.has_variable(name):
            return model.variable_index(name)
        return model.add_variable(name, lb=0.0, ub=INF)

    section = reader.at_section()
    if section not in ("objective", "objective_max"):
        raise ValueError("LP text must start with Minimize or Maximize")
    maximize = section == "objective_max"
    reader.eat_section_header(section)
    # optional objective label
    if (
        reader.peek()
        and _NAME_RE.match(reader.peek() or "")
        and reader.tokens[reader.pos + 1 : reader.pos + 2] == [":"]
    ):
        reader.take()
        reader.take()
    obj_coeffs, obj_const = reader.parse_expression()
    factor = -1.0 if maximize else 1.0
    for name, coeff in obj_coeffs.items():
        idx = ensure_var(name)
        model.objective[idx] = model.objective.get(idx, 0.0) + factor * coeff
    model.objective_constant = factor * obj_const

    while True:
        section = reader.at_section()
        if section is None:
            raise ValueError(f"unexpected token {reader.peek()!r} between sections")
        if section == "end":
            break
        reader.eat_section_header(section)
        if section == "constraints":
            counter = 0
            while reader.at_section() is None:
                label = None
                if (
                    reader.peek()
                    and _NAME_RE.match(reader.peek() or "")
                    and reader.tokens[reader.pos + 1 : reader.pos + 2] == [":"]
                ):
                    label = reader.take()
                    reader.take()
                coeffs, constant = reader.parse_expression()
                sense_tok = reader.take()
                sense = {"=<": "<=", "=>": ">=", "<": "<=", ">": ">=", "==": "="}.get(
                    sense_tok, sense_tok
                )
                rhs = reader.parse_number() - constant
                by_index = {}
                for name, coeff in coeffs.items():
                    by_index[ensure_var(name)] = coeff
                model.add_constraint(
                    by_index, sense, rhs, name=label or f"parsed{counter}"
                )
                counter += 1
        elif section == "bounds":
            while reader.at_section() is None:
                first = reader.peek()
                if first is None:
                    break
                if _NAME_RE.match(first) and first.lower() not in _INF_NAMES:
                    name = reader.take()
                    nxt = reader.peek()
                    if nxt and nxt.lower() == "free":
                        reader.take()
                        bounds_patch[name] = (-INF, INF, True)
                        continue
                    sense = reader.take()
                    value = reader.parse_number()
                    lo, hi, _ = bounds_patch.get(name, (None, None, False))
                    if sense in ("<=", "<", "=<"):
                        bounds_patch[name] = (lo, value, False)
                    elif sense in (">=", ">", "=>"):
                        bounds_patch[name] = (value, hi, False)
                    else:
                        bounds_patch[name] = (value, value, False)
                else:
                    lower = reader.parse_number()
                    reader.take()  # <=
                    name = reader.take()
                    lo, hi, _ = bounds_patch.get(name, (None, None, False))
                    if reader.peek() in ("<=", "<", "=<"):
                        reader.take()
                        upper = reader.parse_number()
                        bounds_patch[name] = (lower, upper, False)
                    else:
                        bounds_patch[name] = (lower, hi, False)
        elif section in ("binaries", "generals"):
            while reader.at_section() is None:
                name = reader.take()
                if section == "binaries":
                    binary_names.append(name)
                else:
                    integer_names.append(name)

    for name, (lo, hi, explicit_free) in bounds_patch.items():
        idx = ensure_var(name)
        var = model.variables[idx]
        if explicit_free:
            var.lb, var.ub = -INF, INF
            continue
        if lo is not None:
            var.lb = lo
        if hi is not None:
            var.ub = hi
    for name in binary_names:
        idx = ensure_var(name)
        var = model.variables[idx]
        var.is_integer = True
        if name not in bounds_patch:
            var.lb = max(var.lb, 0.0)
            var.ub = min(var.ub, 1.0)
    for name in integer_names:
        model.variables[ensure_var(name)].is_integer = True
    return model


def read_lp_file(path: str) -> MilpModel:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_lp(handle.read())


def write_solution_file(path: str, model: MilpModel, values: list[float]) -> None:
    """One `name value` pair per line, objective in a leading comment."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"# objective {_fmt(model.objective_value(values))}\n")
        for var in model.variables:
            handle.write(f"{var.name} {format(values[var.index], '.12g')}\n")


def read_solution_file(path: str) -> dict[str, float]:
    values: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, raw = line.split()
            values[name] = float(raw)
    return values
