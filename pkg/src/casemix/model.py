"""Construction of the capacity-allocation program from a hospital instance.

Decision variables are continuous rates: per-group totals, per-subtype
totals, and the activity-to-resource allocation. Bookkeeping rows tie the
hierarchy together, resource rows cap allocated hours, and subtype-mix
rows hold each group's internal surgical/medical split. A designated
group-level case mix is only imposed on request.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .instance import Caseload, HospitalInstance, InstanceError
from .solver import AbstractProgram, SolveStatus, SolverError, LE, GE, EQ, solve


@dataclass
class CmpProgram:
    """Assembled program plus the variable maps needed to read solutions."""

    program: AbstractProgram
    instance: HospitalInstance
    n1: dict[str, int]
    n2: dict[tuple[str, str], int]
    beta: dict[tuple[str, str], int]
    has_case_mix: bool = False
    upper_bounds: dict[str, float] = field(default_factory=dict)

    def copy(self) -> "CmpProgram":
        return CmpProgram(program=self.program.copy(), instance=self.instance,
                          n1=dict(self.n1), n2=dict(self.n2),
                          beta=dict(self.beta), has_case_mix=self.has_case_mix,
                          upper_bounds=dict(self.upper_bounds))

    def set_throughput_objective(self, sense: float = 1.0) -> None:
        self.program.set_objective({v: sense for v in self.n1.values()})

    def extract_caseload(self, status: SolveStatus) -> Caseload:
        """Read a caseload off a solution, rebuilding totals from the leaves."""
        values = status.values
        alloc = {key: max(0.0, values[idx]) for key, idx in self.beta.items()}
        subtype_totals: dict[tuple[str, str], float] = {}
        group_totals: dict[str, float] = {}
        for g in self.instance.groups:
            total = 0.0
            for s in g.subtypes:
                n2 = values[self.n2[(g.id, s.id)]]
                subtype_totals[(g.id, s.id)] = max(0.0, n2)
                total += max(0.0, n2)
            group_totals[g.id] = total
        return Caseload(group_totals=group_totals,
                        subtype_totals=subtype_totals, allocation=alloc)


def build_model(instance: HospitalInstance,
                case_mix: dict[str, float] | None = None,
                objective: str = "none") -> CmpProgram:
    """Assemble the allocation program for an instance.

    ``case_mix`` maps group ids to designated cohort fractions; when given,
    the fractions must cover every group and sum to one, and the
    corresponding floor rows are added. ``objective`` is ``"none"`` (left
    for a scalarization to fill in) or ``"throughput"``.
    """
    if case_mix is not None:
        missing = [g.id for g in instance.groups if g.id not in case_mix]
        if missing:
            raise InstanceError(f"case mix missing groups {missing}")
        total = sum(case_mix.values())
        if abs(total - 1.0) > 1e-9:
            raise InstanceError(f"case mix fractions sum to {total}, expected 1")

    prog = AbstractProgram(name=f"cmp:{instance.name}")
    n1: dict[str, int] = {}
    n2: dict[tuple[str, str], int] = {}
    beta: dict[tuple[str, str], int] = {}

    for g in instance.groups:
        n1[g.id] = prog.add_var(f"n1_{g.id}", lb=0.0, ub=g.treatment_limit)
        for s in g.subtypes:
            n2[(g.id, s.id)] = prog.add_var(f"n2_{g.id}_{s.id}", lb=0.0)
            for a in s.activities:
                if a.duration_hours == 0.0:
                    continue  # no capacity impact: keep it out of the program
                for rid in a.eligible_resources:
                    beta[(a.id, rid)] = prog.add_var(f"b_{a.id}_{rid}", lb=0.0)

    # hierarchy: group total equals the sum of its subtype totals
    for g in instance.groups:
        coeffs = {n1[g.id]: 1.0}
        for s in g.subtypes:
            coeffs[n2[(g.id, s.id)]] = -1.0
        prog.add_constr(coeffs, EQ, 0.0, name=f"hier_{g.id}")

    # every activity of a subtype serves exactly its subtype total
    for g in instance.groups:
        for s in g.subtypes:
            for a in s.activities:
                if a.duration_hours == 0.0:
                    continue
                coeffs = {n2[(g.id, s.id)]: 1.0}
                for rid in a.eligible_resources:
                    coeffs[beta[(a.id, rid)]] = -1.0
                prog.add_constr(coeffs, EQ, 0.0, name=f"serve_{a.id}")

    # resource time capacity
    durations = {a.id: a.duration_hours
                 for g in instance.groups for s in g.subtypes
                 for a in s.activities}
    by_resource: dict[str, dict[int, float]] = {}
    for (aid, rid), var in beta.items():
        by_resource.setdefault(rid, {})[var] = durations[aid]
    for rid, coeffs in by_resource.items():
        prog.add_constr(coeffs, LE, instance.resource_hours(rid),
                        name=f"cap_{rid}")

    # subtype mix floors (the within-group split is instance data)
    for g in instance.groups:
        if len(g.subtypes) < 2:
            continue
        for s in g.subtypes:
            coeffs = {n2[(g.id, s.id)]: 1.0, n1[g.id]: -s.mix_fraction}
            prog.add_constr(coeffs, GE, 0.0, name=f"mix_{g.id}_{s.id}")

    # designated group-level case mix, when requested
    if case_mix is not None:
        for g in instance.groups:
            coeffs = {n1[other.id]: -case_mix[g.id] for other in instance.groups}
            coeffs[n1[g.id]] = coeffs.get(n1[g.id], 0.0) + 1.0
            prog.add_constr(coeffs, GE, 0.0, name=f"cmix_{g.id}")

    cmp_prog = CmpProgram(program=prog, instance=instance, n1=n1, n2=n2,
                          beta=beta, has_case_mix=case_mix is not None)
    if objective == "throughput":
        cmp_prog.set_throughput_objective()
    elif objective != "none":
        raise InstanceError(f"unknown objective {objective!r}")
    return cmp_prog


def solve_throughput(instance: HospitalInstance,
                     floors: dict[str, float] | None = None,
                     backend: str | None = None) -> tuple[SolveStatus, Caseload | None]:
    """Maximize total output, optionally with per-group floors."""
    cmp_prog = build_model(instance, objective="throughput")
    if floors:
        for gid, floor in floors.items():
            if floor > 0.0:
                cmp_prog.program.add_constr({cmp_prog.n1[gid]: 1.0}, GE, floor,
                                            name=f"floor_{gid}")
    status = solve(cmp_prog.program, backend=backend)
    if not status.is_optimal:
        return status, None
    return status, cmp_prog.extract_caseload(status)


def compute_upper_bounds(instance: HospitalInstance,
                         backend: str | None = None) -> dict[str, float]:
    """Per-group attainable maxima with every other group dropped."""
    bounds: dict[str, float] = {}
    for g in instance.groups:
        solo = instance.restrict_to(g.id)
        status, _ = solve_throughput(solo, backend=backend)
        if not status.is_optimal:
            raise SolverError(
                f"upper-bound solve failed for group {g.id}: "
                f"{status.status} {status.message}")
        bounds[g.id] = status.objective
    return bounds
