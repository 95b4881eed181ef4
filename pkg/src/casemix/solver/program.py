"""Backend-agnostic linear / mixed-integer program container.

A program is a flat list of variables (continuous or binary, with bounds)
plus sparse linear constraint rows and a linear objective. Backends consume
this structure directly; nothing here depends on any particular solver.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass


LE, GE, EQ = "<=", ">=", "=="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ERROR = "error"


class SolverError(Exception):
    """Raised for malformed programs or backend failures."""


@dataclass
class _Var:
    name: str
    lb: float | None
    ub: float | None
    binary: bool = False


@dataclass
class Constraint:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str = ""


@dataclass
class SolveStatus:
    """Outcome of one solve: status, objective, variable values, stats."""

    status: str
    objective: float | None = None
    values: list[float] | None = None
    message: str = ""
    iterations: int = 0
    wall_time: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    def value(self, var: int) -> float:
        if self.values is None:
            raise SolverError("no solution values available")
        return self.values[var]


class AbstractProgram:
    """Mutable LP/MILP being assembled. Objective sense is always maximize."""

    def __init__(self, name: str = "program"):
        self.name = name
        self._vars: list[_Var] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self.objective_constant: float = 0.0

    # -- variables ---------------------------------------------------------
    def add_var(self, name: str, lb: float | None = 0.0,
                ub: float | None = None, binary: bool = False) -> int:
        if binary:
            lb, ub = 0.0, 1.0
        if lb is not None and ub is not None and lb > ub + 1e-12:
            raise SolverError(f"variable {name}: lb {lb} > ub {ub}")
        for b in (lb, ub):
            if b is not None and not math.isfinite(b):
                raise SolverError(f"variable {name}: non-finite bound {b}")
        self._vars.append(_Var(name, lb, ub, binary))
        return len(self._vars) - 1

    @property
    def num_vars(self) -> int:
        return len(self._vars)

    def var_name(self, idx: int) -> str:
        return self._vars[idx].name

    def var_bounds(self, idx: int) -> tuple[float | None, float | None]:
        v = self._vars[idx]
        return v.lb, v.ub

    def set_var_bounds(self, idx: int, lb: float | None, ub: float | None) -> None:
        self._vars[idx].lb = lb
        self._vars[idx].ub = ub

    def is_binary(self, idx: int) -> bool:
        return self._vars[idx].binary

    @property
    def binary_indices(self) -> list[int]:
        return [i for i, v in enumerate(self._vars) if v.binary]

    @property
    def is_mip(self) -> bool:
        return any(v.binary for v in self._vars)

    # -- constraints and objective ------------------------------------------
    def add_constr(self, coeffs: dict[int, float], sense: str, rhs: float,
                   name: str = "") -> int:
        if sense not in (LE, GE, EQ):
            raise SolverError(f"bad constraint sense {sense!r}")
        if not math.isfinite(rhs):
            raise SolverError(f"constraint {name or len(self.constraints)}: non-finite rhs")
        clean = {}
        for idx, c in coeffs.items():
            if idx < 0 or idx >= len(self._vars):
                raise SolverError(f"constraint {name!r} references unknown variable {idx}")
            if not math.isfinite(c):
                raise SolverError(f"constraint {name!r}: non-finite coefficient")
            if c != 0.0:
                clean[idx] = clean.get(idx, 0.0) + c
        self.constraints.append(Constraint(clean, sense, rhs, name))
        return len(self.constraints) - 1

    def set_objective(self, coeffs: dict[int, float], constant: float = 0.0) -> None:
        for idx, c in coeffs.items():
            if idx < 0 or idx >= len(self._vars):
                raise SolverError(f"objective references unknown variable {idx}")
            if not math.isfinite(c):
                raise SolverError("objective has non-finite coefficient")
        self.objective = {i: c for i, c in coeffs.items() if c != 0.0}
        self.objective_constant = constant

    def copy(self) -> "AbstractProgram":
        dup = AbstractProgram(self.name)
        dup._vars = [_Var(v.name, v.lb, v.ub, v.binary) for v in self._vars]
        dup.constraints = [Constraint(dict(c.coeffs), c.sense, c.rhs, c.name)
                           for c in self.constraints]
        dup.objective = dict(self.objective)
        dup.objective_constant = self.objective_constant
        return dup

    def objective_value(self, values) -> float:
        return sum(c * values[i] for i, c in self.objective.items()) + self.objective_constant


def timed(fn):
    """Wrap a backend solve so wall time is always recorded."""
    def wrapper(program: AbstractProgram) -> SolveStatus:
        t0 = time.perf_counter()
        out = fn(program)
        out.wall_time = time.perf_counter() - t0
        return out
    return wrapper
