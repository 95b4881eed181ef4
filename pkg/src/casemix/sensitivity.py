"""Parameter sweeps over the utility catalog.

One sweep fixes a template, varies one parameter (or a comma-joined pair)
over a value grid, and solves the max-min and/or max-sum objective for
every grid point. Values are interpreted as percentages of each group's
own upper bound by default, so a single grid drives all groups. Runs are
independent; failures are recorded per row and the sweep continues.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .model import CmpProgram, build_model, compute_upper_bounds
from .instance import Caseload, HospitalInstance
from .scalarize import AsfConfig, SolveResult, solve_asf
from .utility import UfSpec, instantiate

OBJECTIVES = ("mmu", "msu")


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    """What to vary: template, parameter name(s), grid, objectives."""

    template: str
    param: str                      # e.g. "aspiration"; pairs: "indifference,aspiration"
    values: tuple = ()
    pct: bool = True                # grid given as % of each group's bound
    objectives: tuple[str, ...] = OBJECTIVES
    fixed_params: dict = field(default_factory=dict)
    weights: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "objectives", tuple(self.objectives))
        if not self.values:
            raise SweepError("sweep needs at least one value")
        bad = [o for o in self.objectives if o not in OBJECTIVES]
        if bad:
            raise SweepError(f"unknown objectives {bad}; pick from {OBJECTIVES}")
        names = self.param_names()
        for v in self.values:
            parts = v if isinstance(v, (tuple, list)) else (v,)
            if len(parts) != len(names):
                raise SweepError(
                    f"value {v!r} does not match parameters {names}")
            if self.pct and any(not 0 <= p <= 100 for p in parts):
                raise SweepError(f"percentage value {v!r} outside [0, 100]")

    def param_names(self) -> tuple[str, ...]:
        return tuple(p.strip() for p in self.param.split(","))

    def spec_for(self, value) -> UfSpec:
        parts = value if isinstance(value, (tuple, list)) else (value,)
        params = dict(self.fixed_params)
        for name, v in zip(self.param_names(), parts):
            params[f"{name}_pct" if self.pct else name] = v
        return UfSpec(template=self.template, params=params)


@dataclass
class SweepRow:
    value: object
    objective: str
    status: str
    total_output: float | None = None
    sum_utility: float | None = None
    min_utility: float | None = None
    zeroed: bool = False
    case_mix_pct: dict[str, float] | None = None
    caseload: Caseload | None = None
    error: str | None = None


@dataclass
class SweepReport:
    spec: SweepSpec
    bounds: dict[str, float]
    rows: list[SweepRow] = field(default_factory=list)

    def row(self, value, objective: str) -> SweepRow:
        for r in self.rows:
            if r.value == value and r.objective == objective:
                return r
        raise KeyError((value, objective))

    def to_rows(self) -> list[dict]:
        out = []
        for r in self.rows:
            out.append({
                "value": r.value if not isinstance(r.value, tuple) else list(r.value),
                "objective": r.objective,
                "N": r.total_output,
                "sum_u": r.sum_utility,
                "min_u": r.min_utility,
                "zeroed": r.zeroed,
                "status": r.status,
                "error": r.error,
            })
        return out

    def to_dict(self) -> dict:
        return {
            "template": self.spec.template,
            "param": self.spec.param,
            "pct": self.spec.pct,
            "bounds": self.bounds,
            "rows": self.to_rows(),
            "case_mix": {
                f"{r.value}|{r.objective}": r.case_mix_pct for r in self.rows},
            "case_mix_diff": case_mix_diff(self),
        }


_MMU_TIE_BREAK = "min-output"  # canonical least-output optimum for max-min runs


def _one_run(cmp_prog: CmpProgram, bounds: dict[str, float], spec: SweepSpec,
             value, objective: str, backend: str | None) -> SweepRow:
    try:
        plfs = {gid: instantiate(spec.spec_for(value), bounds[gid])
                for gid in bounds}
        cfg = (AsfConfig.mmu(spec.weights) if objective == "mmu"
               else AsfConfig.msu(spec.weights))
        tie = _MMU_TIE_BREAK if objective == "mmu" else "none"
        result: SolveResult = solve_asf(cmp_prog, plfs, cfg, backend=backend,
                                        tie_break=tie)
    except Exception as exc:  # per-row isolation: a bad value must not kill the sweep
        return SweepRow(value=value, objective=objective, status="error",
                        error=str(exc))
    if not result.is_optimal:
        return SweepRow(value=value, objective=objective, status=result.status,
                        error=result.details.get("message"))
    return SweepRow(value=value, objective=objective, status="optimal",
                    total_output=result.total_output,
                    sum_utility=result.sum_utility,
                    min_utility=result.min_utility,
                    zeroed=result.zeroed,
                    case_mix_pct=result.case_mix_pct,
                    caseload=result.caseload)


def run_sweep(instance: HospitalInstance, spec: SweepSpec,
              bounds: dict[str, float] | None = None,
              backend: str | None = None, jobs: int = 1) -> SweepReport:
    """Solve every (value, objective) cell; rows come back in grid order."""
    if bounds is None:
        bounds = compute_upper_bounds(instance, backend=backend)
    cmp_prog = build_model(instance)
    cells = [(v, o) for v in spec.values for o in spec.objectives]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(
                lambda cell: _one_run(cmp_prog, bounds, spec, cell[0], cell[1],
                                      backend), cells))
    else:
        rows = [_one_run(cmp_prog, bounds, spec, v, o, backend)
                for v, o in cells]
    return SweepReport(spec=spec, bounds=bounds, rows=rows)


def case_mix_diff(report: SweepReport) -> dict[str, dict[str, float]]:
    """Per-group min/max/range of the case-mix share across non-zeroed runs.

    Returns an empty mapping when every run is zeroed or failed.
    """
    shares: dict[str, list[float]] = {}
    for row in report.rows:
        if row.status != "optimal" or row.zeroed or not row.case_mix_pct:
            continue
        for gid, pct in row.case_mix_pct.items():
            shares.setdefault(gid, []).append(pct)
    return {gid: {"min_pct": min(v), "max_pct": max(v),
                  "range": max(v) - min(v)}
            for gid, v in shares.items()}
