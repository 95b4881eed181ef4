"""HiGHS backend via scipy.optimize (linprog for LPs, milp for MIPs)."""
from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.optimize import linprog, milp, Bounds, LinearConstraint

from .program import (AbstractProgram, SolveStatus,
                      LE, GE, EQ, OPTIMAL, INFEASIBLE, ERROR, timed)

_MIP_GAP = 1e-9
_FEAS_TOL = 1e-9


def _constraint_matrices(program: AbstractProgram):
    """Rows as one sparse matrix with per-row [lo, hi] activity bounds."""
    n = program.num_vars
    rows, cols, vals = [], [], []
    lo, hi = [], []
    for r, con in enumerate(program.constraints):
        for idx, c in con.coeffs.items():
            rows.append(r)
            cols.append(idx)
            vals.append(c)
        if con.sense == LE:
            lo.append(-np.inf)
            hi.append(con.rhs)
        elif con.sense == GE:
            lo.append(con.rhs)
            hi.append(np.inf)
        else:
            lo.append(con.rhs)
            hi.append(con.rhs)
    mat = sparse.csr_matrix((vals, (rows, cols)),
                            shape=(len(program.constraints), n))
    return mat, np.array(lo), np.array(hi)


@timed
def solve_highs(program: AbstractProgram) -> SolveStatus:
    n = program.num_vars
    if n == 0:
        return SolveStatus(OPTIMAL, program.objective_constant, [])
    c = np.zeros(n)
    for idx, coef in program.objective.items():
        c[idx] = -coef  # scipy minimizes
    lbs = np.array([lb if lb is not None else -np.inf
                    for lb, _ in (program.var_bounds(i) for i in range(n))])
    ubs = np.array([ub if ub is not None else np.inf
                    for _, ub in (program.var_bounds(i) for i in range(n))])
    mat, lo, hi = _constraint_matrices(program)

    if program.is_mip:
        integrality = np.zeros(n)
        for i in program.binary_indices:
            integrality[i] = 1
        constraints = [LinearConstraint(mat, lo, hi)] if program.constraints else []
        res = milp(c=c, constraints=constraints, integrality=integrality,
                   bounds=Bounds(lbs, ubs),
                   options={"mip_rel_gap": _MIP_GAP})
        if res.status == 0:
            values = [float(v) for v in res.x]
            obj = program.objective_value(values)
            return SolveStatus(OPTIMAL, obj, values,
                               iterations=int(getattr(res, "mip_node_count", 0) or 0))
        if res.status == 2:
            return SolveStatus(INFEASIBLE, message=res.message)
        return SolveStatus(ERROR, message=f"milp status {res.status}: {res.message}")

    a_ub_rows, b_ub, a_eq_rows, b_eq = [], [], [], []
    for r, con in enumerate(program.constraints):
        if con.sense == EQ:
            a_eq_rows.append(r)
            b_eq.append(con.rhs)
        elif con.sense == LE:
            a_ub_rows.append(r)
            b_ub.append(con.rhs)
        else:
            a_ub_rows.append(r)
            b_ub.append(-con.rhs)
    a_ub = mat[a_ub_rows] if a_ub_rows else None
    if a_ub is not None:
        ge_mask = np.array([program.constraints[r].sense == GE for r in a_ub_rows])
        scale = np.where(ge_mask, -1.0, 1.0)
        a_ub = sparse.diags(scale) @ a_ub
    a_eq = mat[a_eq_rows] if a_eq_rows else None
    res = linprog(c, A_ub=a_ub, b_ub=b_ub or None, A_eq=a_eq, b_eq=b_eq or None,
                  bounds=np.column_stack([lbs, ubs]), method="highs",
                  options={"primal_feasibility_tolerance": _FEAS_TOL,
                           "dual_feasibility_tolerance": _FEAS_TOL})
    if res.status == 0:
        values = [float(v) for v in res.x]
        obj = program.objective_value(values)
        return SolveStatus(OPTIMAL, obj, values, iterations=int(res.nit))
    if res.status == 2:
        return SolveStatus(INFEASIBLE, message=res.message)
    if res.status == 3:
        return SolveStatus(ERROR, message="unbounded: " + res.message)
    return SolveStatus(ERROR, message=f"linprog status {res.status}: {res.message}")
