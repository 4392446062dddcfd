"""Solver-neutral standard-form linear models.

A :class:`LinearModel` is a plain container: named variables with kinds
and bounds, a minimization objective, and labeled linear constraints.
Constraint labels carry the model-family tag of the row they transcribe
(``eq2[i=0]``, ``eq16[i=1,k=2]``, ...), which keeps every row traceable
back to the formulation it came from.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

LE = "<="
EQ = "="
GE = ">="

_LABEL_RE = re.compile(r"^eq(\d+)")


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lb: float
    ub: float


@dataclass(frozen=True)
class Constraint:
    label: str
    terms: tuple[tuple[int, float], ...]
    relation: str
    rhs: float


@dataclass
class LinearModel:
    """Minimization model; built once, treated as immutable afterwards."""

    variables: list[Variable] = field(default_factory=list)
    objective: list[tuple[int, float]] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    name_index: dict[str, int] = field(default_factory=dict)

    # -- construction -------------------------------------------------

    def add_variable(self, name: str, kind: str = CONTINUOUS,
                     lb: float = 0.0, ub: float = math.inf) -> int:
        if name in self.name_index:
            raise ValueError(f"duplicate variable name {name!r}")
        if kind == BINARY:
            lb, ub = 0.0, 1.0
        elif not (math.isfinite(lb) or lb == -math.inf) or math.isnan(ub):
            raise ValueError(f"bad bounds for {name!r}")
        idx = len(self.variables)
        self.variables.append(Variable(name, kind, lb, ub))
        self.name_index[name] = idx
        return idx

    def add_constraint(self, label: str, terms, relation: str, rhs: float) -> None:
        if relation not in (LE, EQ, GE):
            raise ValueError(f"bad relation {relation!r}")
        clean = tuple((int(j), float(c)) for j, c in terms if c != 0.0)
        for j, c in clean:
            if not (0 <= j < len(self.variables)) or not math.isfinite(c):
                raise ValueError(f"bad term ({j}, {c}) in {label}")
        if not math.isfinite(rhs):
            raise ValueError(f"non-finite rhs in {label}")
        self.constraints.append(Constraint(label, clean, relation, float(rhs)))

    def set_objective(self, terms) -> None:
        self.objective = [(int(j), float(c)) for j, c in terms if c != 0.0]

    # -- queries ------------------------------------------------------

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def binary_indices(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.kind == BINARY]

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(len(self.variables))
        for j, coeff in self.objective:
            c[j] += coeff
        return c

    def objective_value(self, values) -> float:
        x = as_value_array(self, values)
        return float(self.objective_vector() @ x)

    def constraint_labels(self) -> list[str]:
        return [con.label for con in self.constraints]

    def source_equation(self, label: str) -> int:
        """Model-family equation number encoded in a constraint label."""
        m = _LABEL_RE.match(label)
        if not m:
            raise ValueError(f"label {label!r} carries no equation tag")
        return int(m.group(1))


def as_value_array(model: LinearModel, values) -> np.ndarray:
    """Normalize a by-name mapping or a sequence into a full value vector."""
    n = model.num_variables
    if isinstance(values, dict):
        unknown = set(values) - set(model.name_index)
        if unknown:
            raise ValueError(f"unknown variable {sorted(unknown)[0]!r} in assignment")
        x = np.zeros(n)
        for name, v in values.items():
            x[model.name_index[name]] = v
        return x
    x = np.asarray(values, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"assignment has {x.shape} values, model has {n} variables")
    return x


@dataclass(frozen=True)
class Violation:
    label: str
    amount: float
    slack: float


def check_feasibility(model: LinearModel, values, tol: float = 1e-7,
                      labels: tuple[str, ...] | None = None) -> list[Violation]:
    """List every constraint (and bound) violated beyond ``tol``.

    ``values`` may be a name->value mapping (missing flow variables are an
    error: the assignment must cover all variables when given as a dict of
    full solutions; partial dicts default missing names to 0) or a plain
    vector.  An empty return value means the point is feasible.
    """
    x = as_value_array(model, values)
    out = []
    prefixes = tuple(labels) if labels is not None else None
    for con in model.constraints:
        if prefixes is not None and not con.label.startswith(prefixes):
            continue
        act = sum(c * x[j] for j, c in con.terms)
        if con.relation == EQ:
            slack = -abs(act - con.rhs)
        elif con.relation == LE:
            slack = con.rhs - act
        else:
            slack = act - con.rhs
        if slack < -tol:
            out.append(Violation(con.label, -slack, slack))
    if prefixes is None:
        for j, var in enumerate(model.variables):
            below = var.lb - x[j]
            above = x[j] - var.ub
            worst = max(below, above)
            if worst > tol:
                out.append(Violation(f"bound[{var.name}]", worst, -worst))
    return out


def with_extra_constraint(model: LinearModel, label: str, terms, relation: str,
                          rhs: float) -> LinearModel:
    """Copy of ``model`` with one appended row (source model untouched)."""
    clone = LinearModel(
        variables=list(model.variables),
        objective=list(model.objective),
        constraints=list(model.constraints),
        name_index=dict(model.name_index),
    )
    clone.add_constraint(label, terms, relation, rhs)
    return clone


def dump_model(model: LinearModel) -> str:
    """Deterministic LP-style text listing, for diffing and debugging."""
    lines = []
    obj = " + ".join(f"{c:g} {model.variables[j].name}"
                     for j, c in sorted(model.objective)) or "0"
    lines.append(f"minimize: {obj}")
    lines.append("subject to:")
    for con in model.constraints:
        body = " + ".join(f"{c:g} {model.variables[j].name}" for j, c in con.terms) or "0"
        lines.append(f"  {con.label}: {body} {con.relation} {con.rhs:g}")
    lines.append("bounds:")
    for var in model.variables:
        lo = "-inf" if var.lb == -math.inf else f"{var.lb:g}"
        hi = "+inf" if var.ub == math.inf else f"{var.ub:g}"
        lines.append(f"  {lo} <= {var.name} <= {hi}")
    binaries = [v.name for v in model.variables if v.kind == BINARY]
    if binaries:
        lines.append("binary: " + " ".join(binaries))
    return "\n".join(lines) + "\n"
