"""LP/MILP abstraction: program container, backends, and the PLF encoder.

The backend is chosen per call, falling back to the ``CASEMIX_SOLVER``
environment variable and then to HiGHS (via scipy). ``simplex`` selects
the built-in dense two-phase simplex / branch-and-bound, which has no
third-party solver dependency and is intended for small programs.
"""
from __future__ import annotations

import os

from .program import (AbstractProgram, Constraint, SolveStatus, SolverError,
                      LE, GE, EQ, OPTIMAL, INFEASIBLE, ERROR)
from .highs import solve_highs
from .fallback import solve_fallback
from .plf import encode_plf, MAX_SEGMENTS
from .lp_format import write_lp

BACKENDS = {
    "highs": solve_highs,
    "simplex": solve_fallback,
}

DEFAULT_BACKEND = "highs"
_ENV_VAR = "CASEMIX_SOLVER"


def resolve_backend(name: str | None = None) -> str:
    name = name or os.environ.get(_ENV_VAR) or DEFAULT_BACKEND
    if name not in BACKENDS:
        raise SolverError(
            f"unknown solver backend {name!r}; available: {sorted(BACKENDS)}")
    return name


def solve(program: AbstractProgram, backend: str | None = None) -> SolveStatus:
    """Solve a program with the selected backend."""
    return BACKENDS[resolve_backend(backend)](program)


__all__ = [
    "AbstractProgram", "Constraint", "SolveStatus", "SolverError",
    "LE", "GE", "EQ", "OPTIMAL", "INFEASIBLE", "ERROR",
    "solve", "solve_highs", "solve_fallback", "resolve_backend",
    "encode_plf", "MAX_SEGMENTS", "write_lp", "BACKENDS", "DEFAULT_BACKEND",
]
