"""Hospital instance data model: resources, patient groups, activities.

Immutable after construction; instances are safe to share between
concurrent solves.
"""
from __future__ import annotations

from dataclasses import dataclass, field

RESOURCE_KINDS = ("theatre", "ward", "icu")
_MIX_TOL = 1e-9


class InstanceError(ValueError):
    """Structural problem in an instance definition. Carries a data path."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class Resource:
    id: str
    kind: str
    bed_count: int = 1
    weekly_hours: float = 168.0

    def __post_init__(self):
        if self.kind not in RESOURCE_KINDS:
            raise InstanceError(f"unknown resource kind {self.kind!r}",
                                f"resource {self.id}")
        if self.bed_count < 1:
            raise InstanceError("bed_count must be at least 1",
                                f"resource {self.id}")
        if self.weekly_hours <= 0:
            raise InstanceError("weekly_hours must be positive",
                                f"resource {self.id}")

    def total_hours(self, horizon_weeks: int) -> float:
        return self.bed_count * self.weekly_hours * horizon_weeks


@dataclass(frozen=True)
class Activity:
    id: str
    duration_hours: float
    eligible_resources: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "eligible_resources",
                           tuple(self.eligible_resources))
        if self.duration_hours < 0:
            raise InstanceError("duration must be nonnegative",
                                f"activity {self.id}")
        if not self.eligible_resources:
            raise InstanceError("eligible resource set is empty",
                                f"activity {self.id}")


@dataclass(frozen=True)
class Subtype:
    id: str
    mix_fraction: float
    activities: tuple[Activity, ...]

    def __post_init__(self):
        object.__setattr__(self, "activities", tuple(self.activities))
        if not 0.0 <= self.mix_fraction <= 1.0:
            raise InstanceError("mix_fraction must lie in [0, 1]",
                                f"subtype {self.id}")


@dataclass(frozen=True)
class PatientGroup:
    id: str
    subtypes: tuple[Subtype, ...]
    group_mix: float | None = None
    treatment_limit: float | None = None  # contracted output cap, if any

    def __post_init__(self):
        object.__setattr__(self, "subtypes", tuple(self.subtypes))
        if not self.subtypes:
            raise InstanceError("group has no subtypes", f"group {self.id}")
        total = sum(s.mix_fraction for s in self.subtypes)
        if abs(total - 1.0) > _MIX_TOL:
            raise InstanceError(
                f"subtype mix fractions sum to {total!r}, expected 1",
                f"group {self.id}")
        if self.treatment_limit is not None and self.treatment_limit <= 0:
            raise InstanceError("treatment_limit must be positive",
                                f"group {self.id}")


@dataclass(frozen=True)
class HospitalInstance:
    resources: tuple[Resource, ...]
    groups: tuple[PatientGroup, ...]
    horizon_weeks: int
    name: str = "instance"
    resource_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "resources", tuple(self.resources))
        object.__setattr__(self, "groups", tuple(self.groups))
        if self.horizon_weeks < 1:
            raise InstanceError("horizon_weeks must be a positive integer")
        idx = {}
        for r in self.resources:
            if r.id in idx:
                raise InstanceError(f"duplicate resource id {r.id!r}")
            idx[r.id] = r
        object.__setattr__(self, "resource_index", idx)
        seen_groups: set[str] = set()
        seen_acts: set[str] = set()
        mix_total = 0.0
        any_mix = False
        for g in self.groups:
            if g.id in seen_groups:
                raise InstanceError(f"duplicate group id {g.id!r}")
            seen_groups.add(g.id)
            if g.group_mix is not None:
                any_mix = True
                mix_total += g.group_mix
            for s in g.subtypes:
                for a in s.activities:
                    if a.id in seen_acts:
                        raise InstanceError(f"duplicate activity id {a.id!r}",
                                            f"group {g.id}")
                    seen_acts.add(a.id)
                    kinds = set()
                    for rid in a.eligible_resources:
                        if rid not in idx:
                            raise InstanceError(
                                f"activity {a.id!r} references unknown "
                                f"resource {rid!r}", f"group {g.id}")
                        kinds.add(idx[rid].kind)
                    if len(kinds) > 1:
                        raise InstanceError(
                            f"activity {a.id!r} mixes resource kinds {sorted(kinds)}",
                            f"group {g.id}")
        if any_mix:
            missing = [g.id for g in self.groups if g.group_mix is None]
            if missing:
                raise InstanceError(
                    f"group_mix set on some groups but missing on {missing}")
            if abs(mix_total - 1.0) > _MIX_TOL:
                raise InstanceError(
                    f"group mix fractions sum to {mix_total!r}, expected 1")

    def group(self, gid: str) -> PatientGroup:
        for g in self.groups:
            if g.id == gid:
                return g
        raise KeyError(gid)

    def resource_hours(self, rid: str) -> float:
        return self.resource_index[rid].total_hours(self.horizon_weeks)

    def restrict_to(self, gid: str) -> "HospitalInstance":
        """Instance with a single patient group (others dropped entirely)."""
        return HospitalInstance(resources=self.resources,
                                groups=(self.group(gid),),
                                horizon_weeks=self.horizon_weeks,
                                name=f"{self.name}:{gid}")


@dataclass(frozen=True)
class Caseload:
    """Outputs per group/subtype plus the activity-to-resource allocation."""

    group_totals: dict[str, float]
    subtype_totals: dict[tuple[str, str], float]
    allocation: dict[tuple[str, str], float]

    @property
    def total(self) -> float:
        return sum(self.group_totals.values())

    def case_mix_pct(self) -> dict[str, float] | None:
        n = self.total
        if n <= 1e-9:
            return None
        return {g: 100.0 * v / n for g, v in self.group_totals.items()}

    def to_dict(self) -> dict:
        return {
            "group_totals": dict(self.group_totals),
            "subtype_totals": {f"{g}/{s}": v
                               for (g, s), v in self.subtype_totals.items()},
            "allocation": {f"{a}@{r}": v
                           for (a, r), v in self.allocation.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Caseload":
        subs = {}
        for key, v in d.get("subtype_totals", {}).items():
            g, s = key.split("/", 1)
            subs[(g, s)] = float(v)
        alloc = {}
        for key, v in d.get("allocation", {}).items():
            a, r = key.rsplit("@", 1)
            alloc[(a, r)] = float(v)
        return cls(group_totals={k: float(v)
                                 for k, v in d["group_totals"].items()},
                   subtype_totals=subs, allocation=alloc)


class CaseloadCheckError(AssertionError):
    """A solved caseload violated a bookkeeping or capacity tolerance."""


def check_caseload(instance: HospitalInstance, caseload: Caseload,
                   tol: float = 1e-6) -> None:
    """Re-verify hierarchy, allocation consistency, and resource capacity.

    Tolerances scale with the magnitude of the quantity checked: solver
    feasibility is relative, and a fixed absolute slack below the
    floating-point noise floor of a hundred-thousand-hour capacity row
    would reject genuinely optimal solutions.
    """
    def slack(scale: float) -> float:
        return tol * max(1.0, abs(scale))

    for g in instance.groups:
        total = caseload.group_totals.get(g.id, 0.0)
        if total < -slack(1.0):
            raise CaseloadCheckError(f"negative output for {g.id}")
        sub_sum = sum(caseload.subtype_totals.get((g.id, s.id), 0.0)
                      for s in g.subtypes)
        if abs(total - sub_sum) > slack(total):
            raise CaseloadCheckError(
                f"{g.id}: group total {total} != subtype sum {sub_sum}")
        for s in g.subtypes:
            n2 = caseload.subtype_totals.get((g.id, s.id), 0.0)
            for a in s.activities:
                if a.duration_hours == 0.0:
                    continue
                assigned = sum(caseload.allocation.get((a.id, r), 0.0)
                               for r in a.eligible_resources)
                if abs(assigned - n2) > slack(n2):
                    raise CaseloadCheckError(
                        f"activity {a.id}: allocated {assigned} != {n2}")
    load: dict[str, float] = {}
    durations = {a.id: a.duration_hours
                 for g in instance.groups for s in g.subtypes
                 for a in s.activities}
    for (aid, rid), beta in caseload.allocation.items():
        load[rid] = load.get(rid, 0.0) + beta * durations[aid]
    for rid, used in load.items():
        cap = instance.resource_hours(rid)
        if used > cap + slack(cap):
            raise CaseloadCheckError(
                f"resource {rid} over capacity: {used} > {cap}")
