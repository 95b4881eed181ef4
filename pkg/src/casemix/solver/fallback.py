"""Self-contained dense two-phase simplex with branch-and-bound on binaries.

Reference backend: no third-party solver involved. Intended for small
programs (toy instances, CI cross-checks); complexity is O(m*n) per pivot
on a dense tableau.
"""
from __future__ import annotations

import numpy as np

from .program import (AbstractProgram, SolveStatus,
                      LE, GE, EQ, OPTIMAL, INFEASIBLE, ERROR, timed)

_EPS = 1e-9
_FEAS = 1e-7
_MAX_PIVOTS = 20000
_MAX_NODES = 50000


class _Unbounded(Exception):
    pass


class _PivotLimit(Exception):
    pass


def _simplex(tableau: np.ndarray, basis: list[int], cost: np.ndarray,
             cost0: float, bland_after: int) -> tuple[float, np.ndarray]:
    """Minimize cost'x over the equality system held in `tableau` ([A|b], b>=0).

    Returns (objective, reduced-cost row with value in last entry).
    Mutates tableau/basis in place.
    """
    m, ncols = tableau.shape
    n = ncols - 1
    z = np.zeros(ncols)
    z[:n] = cost
    z[-1] = -cost0
    for r, bv in enumerate(basis):
        if abs(z[bv]) > 0.0:
            z -= z[bv] * tableau[r]
    pivots = 0
    while True:
        if pivots < bland_after:
            j = int(np.argmin(z[:n]))
            if z[j] >= -_EPS:
                break
        else:  # Bland's rule: first improving column
            improving = np.nonzero(z[:n] < -_EPS)[0]
            if improving.size == 0:
                break
            j = int(improving[0])
        col = tableau[:, j]
        positive = col > _EPS
        if not positive.any():
            raise _Unbounded
        ratios = np.full(m, np.inf)
        ratios[positive] = tableau[positive, -1] / col[positive]
        r = int(np.argmin(ratios))
        # deterministic tie-break on smallest basis index (anti-cycling aid)
        best = ratios[r]
        ties = np.nonzero(np.abs(ratios - best) <= _EPS * (1 + abs(best)))[0]
        if ties.size > 1:
            r = int(min(ties, key=lambda i: basis[i]))
        piv = tableau[r, j]
        tableau[r] /= piv
        for i in range(m):
            if i != r and abs(tableau[i, j]) > 0.0:
                tableau[i] -= tableau[i, j] * tableau[r]
        z -= z[j] * tableau[r]
        basis[r] = j
        pivots += 1
        if pivots > _MAX_PIVOTS:
            raise _PivotLimit
    return -z[-1], z


def _solve_lp_arrays(a: np.ndarray, b: np.ndarray, senses: list[str],
                     cost: np.ndarray, cost0: float) -> tuple[str, float, np.ndarray | None]:
    """Two-phase simplex for min cost'x s.t. a x (sense) b, x >= 0."""
    m, n = a.shape
    a = a.copy()
    b = b.copy()
    senses = list(senses)
    for i in range(m):  # normalize rhs >= 0
        if b[i] < 0:
            a[i] = -a[i]
            b[i] = -b[i]
            senses[i] = {LE: GE, GE: LE, EQ: EQ}[senses[i]]
    n_slack = sum(1 for s in senses if s != EQ)
    n_art = sum(1 for s in senses if s != LE)
    ncols = n + n_slack + n_art + 1
    tableau = np.zeros((m, ncols))
    tableau[:, :n] = a
    tableau[:, -1] = b
    basis: list[int] = [0] * m
    js, ja = n, n + n_slack
    art_cols = []
    for i, s in enumerate(senses):
        if s == LE:
            tableau[i, js] = 1.0
            basis[i] = js
            js += 1
        elif s == GE:
            tableau[i, js] = -1.0
            js += 1
            tableau[i, ja] = 1.0
            basis[i] = ja
            art_cols.append(ja)
            ja += 1
        else:
            tableau[i, ja] = 1.0
            basis[i] = ja
            art_cols.append(ja)
            ja += 1
    bland_after = 5 * (m + ncols)
    if art_cols:
        phase1 = np.zeros(ncols - 1)
        for j in art_cols:
            phase1[j] = 1.0
        obj1, _ = _simplex(tableau, basis, phase1, 0.0, bland_after)
        if obj1 > _FEAS:
            return INFEASIBLE, 0.0, None
        for r, bv in enumerate(basis):  # drive artificials out of the basis
            if bv in art_cols:
                row = tableau[r]
                pivot_j = next((j for j in range(n + n_slack)
                                if abs(row[j]) > _EPS), None)
                if pivot_j is None:
                    continue  # redundant row
                piv = row[pivot_j]
                tableau[r] /= piv
                for i in range(m):
                    if i != r and abs(tableau[i, pivot_j]) > 0.0:
                        tableau[i] -= tableau[i, pivot_j] * tableau[r]
                basis[r] = pivot_j
        for j in art_cols:  # freeze artificial columns at zero
            tableau[:, j] = 0.0
    full_cost = np.zeros(ncols - 1)
    full_cost[:n] = cost
    try:
        obj, _ = _simplex(tableau, basis, full_cost, cost0, bland_after)
    except _Unbounded:
        return "unbounded", 0.0, None
    x = np.zeros(ncols - 1)
    for r, bv in enumerate(basis):
        x[bv] = tableau[r, -1]
    return OPTIMAL, obj, x[:n]


class _Standardized:
    """AbstractProgram mapped to standard form (x >= 0, rows with senses)."""

    def __init__(self, program: AbstractProgram,
                 overrides: dict[int, tuple[float, float]] | None = None):
        overrides = overrides or {}
        nv = program.num_vars
        self.shift = np.zeros(nv)
        self.pos_col = np.full(nv, -1, dtype=int)
        self.neg_col = np.full(nv, -1, dtype=int)
        col = 0
        extra_rows: list[tuple[dict[int, float], str, float]] = []
        for i in range(nv):
            lb, ub = program.var_bounds(i)
            if i in overrides:
                lb, ub = overrides[i]
            if lb is None:
                self.pos_col[i] = col
                self.neg_col[i] = col + 1
                col += 2
            else:
                self.shift[i] = lb
                self.pos_col[i] = col
                col += 1
            if ub is not None:
                extra_rows.append(({i: 1.0}, LE, ub))
        self.ncols = col
        rows = []
        senses = []
        rhs = []
        for con in program.constraints:
            rows.append(con.coeffs)
            senses.append(con.sense)
            rhs.append(con.rhs)
        for coeffs, sense, r in extra_rows:
            rows.append(coeffs)
            senses.append(sense)
            rhs.append(r)
        m = len(rows)
        self.a = np.zeros((m, self.ncols))
        self.b = np.zeros(m)
        self.senses = senses
        for r, (coeffs, rhsval) in enumerate(zip(rows, rhs)):
            adj = rhsval
            for idx, c in coeffs.items():
                adj -= c * self.shift[idx]
                self.a[r, self.pos_col[idx]] += c
                if self.neg_col[idx] >= 0:
                    self.a[r, self.neg_col[idx]] -= c
            self.b[r] = adj
        self.nv = nv

    def cost(self, objective: dict[int, float]) -> tuple[np.ndarray, float]:
        c = np.zeros(self.ncols)
        c0 = 0.0
        for idx, coef in objective.items():
            c[self.pos_col[idx]] += -coef  # maximize -> minimize
            if self.neg_col[idx] >= 0:
                c[self.neg_col[idx]] -= -coef
            c0 += -coef * self.shift[idx]
        return c, c0

    def recover(self, x: np.ndarray) -> list[float]:
        out = []
        for i in range(self.nv):
            v = self.shift[i] + x[self.pos_col[i]]
            if self.neg_col[i] >= 0:
                v -= x[self.neg_col[i]]
            out.append(float(v))
        return out


def _solve_relaxation(program: AbstractProgram,
                      fixes: dict[int, float]) -> tuple[str, float, list[float] | None]:
    overrides = {i: (v, v) for i, v in fixes.items()}
    std = _Standardized(program, overrides)
    cost, cost0 = std.cost(program.objective)
    try:
        status, obj, x = _solve_lp_arrays(std.a, std.b, std.senses, cost, cost0)
    except _PivotLimit:
        return ERROR, 0.0, None
    if status != OPTIMAL:
        return status, 0.0, None
    values = std.recover(x)
    return OPTIMAL, program.objective_value(values) , values


@timed
def solve_fallback(program: AbstractProgram) -> SolveStatus:
    if program.num_vars == 0:
        return SolveStatus(OPTIMAL, program.objective_constant, [])
    binaries = program.binary_indices
    status, obj, values = _solve_relaxation(program, {})
    if status == "unbounded":
        return SolveStatus(ERROR, message="unbounded program")
    if status != OPTIMAL:
        return SolveStatus(status, message="relaxation " + status)
    if not binaries:
        return SolveStatus(OPTIMAL, obj, values)

    best_obj = -np.inf
    best_values: list[float] | None = None
    stack: list[dict[int, float]] = [{}]
    nodes = 0
    while stack:
        fixes = stack.pop()
        nodes += 1
        if nodes > _MAX_NODES:
            return SolveStatus(ERROR, message="branch-and-bound node limit")
        status, obj, values = _solve_relaxation(program, fixes)
        if status == "unbounded":
            return SolveStatus(ERROR, message="unbounded relaxation")
        if status != OPTIMAL or values is None:
            continue
        if obj <= best_obj + 1e-12:
            continue
        frac = [(abs(values[i] - round(values[i])), i) for i in binaries
                if i not in fixes]
        frac = [(f, i) for f, i in frac if f > 1e-6]
        if not frac:
            rounded = list(values)
            for i in binaries:
                rounded[i] = float(round(rounded[i]))
            cand_obj = program.objective_value(rounded)
            if cand_obj > best_obj:
                best_obj = cand_obj
                best_values = rounded
            continue
        _, branch_var = max(frac)
        # push 0-branch first so the 1-branch is explored first (LIFO)
        stack.append({**fixes, branch_var: 0.0})
        stack.append({**fixes, branch_var: 1.0})
    if best_values is None:
        return SolveStatus(INFEASIBLE, message="no integer-feasible point")
    return SolveStatus(OPTIMAL, best_obj, best_values, iterations=nodes)
