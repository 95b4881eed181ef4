"""Pareto-optimality audit: can a caseload be improved without losses?

The audit re-solves for maximum total output with every group floored at
its current value. A positive gap means the caseload was dominated; the
improved caseload is returned alongside the gap.
"""
from __future__ import annotations

from dataclasses import dataclass

from .instance import Caseload, HospitalInstance
from .model import solve_throughput
from .solver import SolverError

_PARETO_REL_TOL = 1e-4
_FLOOR_SLACK = 1e-7


@dataclass(frozen=True)
class ParetoAudit:
    is_pareto: bool
    corrected: Caseload
    base_total: float
    corrected_total: float
    diff: float
    diff_pct: float
    zeroed_base: bool

    def to_dict(self) -> dict:
        return {
            "is_pareto": self.is_pareto,
            "base_total": self.base_total,
            "corrected_total": self.corrected_total,
            "diff": self.diff,
            "diff_pct": self.diff_pct,
            "zeroed_base": self.zeroed_base,
            "corrected": self.corrected.to_dict(),
        }


def check_pareto(instance: HospitalInstance, base: Caseload,
                 backend: str | None = None) -> ParetoAudit:
    """Audit a caseload; raises only if the floored re-solve is infeasible
    (which indicates the base was not actually feasible at tolerance)."""
    floors = {}
    for gid, n in base.group_totals.items():
        floors[gid] = max(0.0, n - _FLOOR_SLACK * max(1.0, n))
    status, corrected = solve_throughput(instance, floors=floors,
                                         backend=backend)
    if corrected is None:
        raise SolverError(
            f"pareto audit infeasible: base caseload violates capacity at "
            f"solver tolerance ({status.message})")
    base_total = base.total
    diff = max(0.0, corrected.total - base_total)
    zeroed = base_total <= 1e-9
    return ParetoAudit(
        is_pareto=diff <= _PARETO_REL_TOL * max(base_total, 1e-12),
        corrected=corrected,
        base_total=base_total,
        corrected_total=corrected.total,
        diff=diff,
        diff_pct=0.0 if zeroed else 100.0 * diff / base_total,
        zeroed_base=zeroed,
    )
