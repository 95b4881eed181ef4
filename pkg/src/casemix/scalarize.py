"""Single-objective scalarizations over the capacity-allocation program.

* ``solve_asf`` attaches per-group utility curves and maximizes
  eps1 * min_g(w_g u_g) + eps2 * sum_g(w_g u_g); the two extremes are the
  max-min-utility and max-sum-utility objectives.
* ``solve_gam`` / ``solve_gpm`` are the goal-attainment and
  goal-programming baselines.
* ``repair`` re-optimizes a caseload that may be dominated, holding every
  group at least at its current output.

Every solve works on its own copy of the program, so a shared CmpProgram
can serve concurrent calls.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .instance import Caseload, check_caseload
from .model import CmpProgram
from .solver import (GE, LE, EQ, SolveStatus, SolverError, encode_plf, solve)
from .utility import PiecewiseLinearUtility

_ZERO_TOL = 1e-6
_TIE_TOL = 1e-6


class ScalarizeError(ValueError):
    """Invalid scalarization configuration."""


@dataclass(frozen=True)
class AsfConfig:
    """Blend weights for the achievement scalarization.

    eps1 scales the worst weighted utility, eps2 the weighted sum.
    (1, 0) maximizes the minimum utility; (0, 1) maximizes the sum.
    """

    eps1: float = 1.0
    eps2: float = 0.0
    weights: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.eps1 < 0 or self.eps2 < 0:
            raise ScalarizeError("eps1 and eps2 must be nonnegative")
        if self.eps1 + self.eps2 <= 0:
            raise ScalarizeError("eps1 + eps2 must be positive")
        if any(w <= 0 for w in self.weights.values()):
            raise ScalarizeError("group weights must be positive")

    def weight(self, gid: str) -> float:
        return self.weights.get(gid, 1.0)

    @classmethod
    def mmu(cls, weights: dict[str, float] | None = None) -> "AsfConfig":
        return cls(1.0, 0.0, weights or {})

    @classmethod
    def msu(cls, weights: dict[str, float] | None = None) -> "AsfConfig":
        return cls(0.0, 1.0, weights or {})


@dataclass(frozen=True)
class GoalConfig:
    """Goals plus weighting for the goal-attainment / goal-programming runs."""

    goals: dict[str, float]
    bounds: dict[str, float]
    gam_weights: str | dict[str, float] = "absolute"  # or "relative"
    weights_over: dict[str, float] = field(default_factory=dict)
    weights_under: dict[str, float] = field(default_factory=dict)
    relative: bool = False

    def __post_init__(self):
        tol = 1e-6
        for gid, goal in self.goals.items():
            ub = self.bounds.get(gid)
            if ub is None:
                raise ScalarizeError(f"no upper bound provided for group {gid}")
            if goal < -tol or goal > ub * (1 + 1e-9) + tol:
                raise ScalarizeError(
                    f"goal for {gid} must lie in [0, {ub}], got {goal}")
        for w in list(self.weights_over.values()) + list(self.weights_under.values()):
            if w < 0:
                raise ScalarizeError("deviation weights must be nonnegative")

    def gam_weight(self, gid: str) -> float:
        if self.gam_weights == "absolute":
            return 1.0
        if self.gam_weights == "relative":
            return self.goals[gid]
        return self.gam_weights[gid]

    def w_over(self, gid: str) -> float:
        return self.weights_over.get(gid, 1.0)

    def w_under(self, gid: str) -> float:
        return self.weights_under.get(gid, 1.0)


@dataclass
class SolveResult:
    """Caseload plus headline metrics for one scalarized solve."""

    method: str
    status: str
    objective_value: float | None = None
    caseload: Caseload | None = None
    utilities: dict[str, float] | None = None
    total_output: float | None = None
    sum_utility: float | None = None
    min_utility: float | None = None
    case_mix_pct: dict[str, float] | None = None
    zeroed: bool = False
    details: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "status": self.status,
            "objective_value": self.objective_value,
            "caseload": self.caseload.to_dict() if self.caseload else None,
            "utilities": self.utilities,
            "total_output": self.total_output,
            "sum_utility": self.sum_utility,
            "min_utility": self.min_utility,
            "case_mix_pct": self.case_mix_pct,
            "zeroed": self.zeroed,
            "details": self.details,
            "solver": self.solver,
        }


def _zero_caseload(cmp_prog: CmpProgram) -> Caseload:
    groups = cmp_prog.instance.groups
    return Caseload(
        group_totals={g.id: 0.0 for g in groups},
        subtype_totals={(g.id, s.id): 0.0 for g in groups for s in g.subtypes},
        allocation={key: 0.0 for key in cmp_prog.beta},
    )


def _result_from_caseload(cmp_prog: CmpProgram, method: str, status: SolveStatus,
                          caseload: Caseload,
                          utilities: dict[str, float] | None,
                          backend: str | None,
                          zeroed: bool = False) -> SolveResult:
    check_caseload(cmp_prog.instance, caseload)
    case_mix = caseload.case_mix_pct()
    res = SolveResult(
        method=method, status="optimal",
        objective_value=status.objective,
        caseload=caseload, utilities=utilities,
        total_output=caseload.total,
        sum_utility=sum(utilities.values()) if utilities else None,
        min_utility=min(utilities.values()) if utilities else None,
        case_mix_pct=case_mix, zeroed=zeroed,
        solver={"backend": backend or "default",
                "iterations": status.iterations,
                "wall_time": status.wall_time},
    )
    return res


def _failed(method: str, status: SolveStatus) -> SolveResult:
    return SolveResult(method=method, status=status.status,
                       details={"message": status.message})


def solve_asf(cmp_prog: CmpProgram,
              plfs: dict[str, PiecewiseLinearUtility],
              cfg: AsfConfig,
              backend: str | None = None,
              tie_break: str = "none") -> SolveResult:
    """Maximize the achievement scalarization over the program.

    ``tie_break`` picks among alternative optima: ``"none"`` returns the
    solver's vertex, ``"min-output"`` / ``"max-output"`` re-optimize total
    output subject to keeping the scalarization optimal. The degenerate
    all-zero optimum (possible when curves are flat at zero) is detected
    and reported with the ``zeroed`` flag.
    """
    if cmp_prog.has_case_mix:
        raise ScalarizeError(
            "utility scalarization requires a program without designated "
            "case-mix constraints")
    missing = [g.id for g in cmp_prog.instance.groups if g.id not in plfs]
    if missing:
        raise ScalarizeError(f"no utility curve for groups {missing}")
    if tie_break not in ("none", "min-output", "max-output"):
        raise ScalarizeError(f"unknown tie_break {tie_break!r}")

    work = cmp_prog.copy()
    prog = work.program
    u_vars: dict[str, int] = {}
    for g in cmp_prog.instance.groups:
        plf = plfs[g.id]
        x = work.n1[g.id]
        lb, ub = prog.var_bounds(x)
        prog.set_var_bounds(x, 0.0, min(plf.domain_max, ub) if ub is not None
                            else plf.domain_max)
        u_vars[g.id] = encode_plf(prog, x, plf, name=f"u_{g.id}")

    w = {g.id: cfg.weight(g.id) for g in cmp_prog.instance.groups}
    objective: dict[int, float] = {}
    if cfg.eps2 > 0:
        for gid, u in u_vars.items():
            objective[u] = cfg.eps2 * w[gid]
    if cfg.eps1 > 0:
        worst_lo = min(w[g] * plfs[g].value_range()[0] for g in u_vars)
        worst_hi = min(w[g] * plfs[g].value_range()[1] for g in u_vars)
        z = prog.add_var("min_utility", lb=worst_lo, ub=worst_hi)
        for gid, u in u_vars.items():
            prog.add_constr({z: 1.0, u: -w[gid]}, LE, 0.0, name=f"worst_{gid}")
        objective[z] = objective.get(z, 0.0) + cfg.eps1
    prog.set_objective(objective)

    status = solve(prog, backend=backend)
    if status.status == "infeasible":
        return _failed("asf", status)
    if not status.is_optimal:
        raise SolverError(f"ASF solve failed: {status.status} {status.message}")

    u_zero = {gid: plfs[gid].evaluate(0.0) for gid in u_vars}
    asf_zero = (cfg.eps1 * min(w[g] * u_zero[g] for g in u_vars)
                + cfg.eps2 * sum(w[g] * u_zero[g] for g in u_vars))
    zeroed = status.objective <= asf_zero + _ZERO_TOL * max(1.0, abs(asf_zero))

    if zeroed:
        caseload = _zero_caseload(work)
    else:
        if tie_break != "none":
            sense = -1.0 if tie_break == "min-output" else 1.0
            guard = prog.copy()
            floor = status.objective - _TIE_TOL
            guard.add_constr(dict(objective), GE, floor, name="asf_floor")
            guard.set_objective({work.n1[g]: sense for g in work.n1})
            second = solve(guard, backend=backend)
            if second.is_optimal:
                status = second
        caseload = work.extract_caseload(status)

    utilities = {gid: plfs[gid].evaluate(
                     plfs[gid].snap_output(caseload.group_totals[gid]))
                 for gid in u_vars}
    asf_value = (cfg.eps1 * min(w[g] * utilities[g] for g in u_vars)
                 + cfg.eps2 * sum(w[g] * utilities[g] for g in u_vars)
                 if utilities else None)
    res = _result_from_caseload(work, "asf", status, caseload, utilities,
                                backend, zeroed=zeroed)
    res.objective_value = asf_value
    res.details = {"eps1": cfg.eps1, "eps2": cfg.eps2, "tie_break": tie_break}
    return res


def _relative_utilities(cfg: GoalConfig, caseload: Caseload) -> dict[str, float]:
    return {gid: 100.0 * min(n, cfg.bounds[gid]) / cfg.bounds[gid]
            for gid, n in caseload.group_totals.items()}


def solve_gam(cmp_prog: CmpProgram, cfg: GoalConfig,
              backend: str | None = None) -> SolveResult:
    """Goal attainment: minimize the single slack needed to box every group
    within ``goal ± weight * slack``."""
    work = cmp_prog.copy()
    prog = work.program
    delta = prog.add_var("delta", lb=0.0)
    for g in cmp_prog.instance.groups:
        wgt = cfg.gam_weight(g.id)
        goal = cfg.goals[g.id]
        n1 = work.n1[g.id]
        prog.add_constr({n1: 1.0, delta: -wgt}, LE, goal, name=f"gam_over_{g.id}")
        prog.add_constr({n1: 1.0, delta: wgt}, GE, goal, name=f"gam_under_{g.id}")
    prog.set_objective({delta: -1.0})
    status = solve(prog, backend=backend)
    if status.status == "infeasible":
        failed = _failed("gam", status)
        failed.details["diagnostic"] = (
            "goal box is empty; check weight signs (negative weights forbid "
            "reaching any goal)")
        return failed
    if not status.is_optimal:
        raise SolverError(f"GAM solve failed: {status.status} {status.message}")
    caseload = work.extract_caseload(status)
    utilities = _relative_utilities(cfg, caseload)
    res = _result_from_caseload(work, "gam", status, caseload, utilities, backend)
    res.objective_value = status.value(delta)
    res.details = {"delta": status.value(delta), "weights": cfg.gam_weights}
    return res


def solve_gpm(cmp_prog: CmpProgram, cfg: GoalConfig, mode: str = "sum",
              backend: str | None = None) -> SolveResult:
    """Goal programming: per-group over/under deviations with binary
    complementarity; minimizes their weighted sum or the worst
    (weighted) under-deviation."""
    if mode not in ("sum", "minimax-under"):
        raise ScalarizeError(f"unknown GPM mode {mode!r}")
    if cfg.relative:
        zero_goals = [g for g, v in cfg.goals.items() if v <= 0]
        if zero_goals:
            raise ScalarizeError(
                f"relative deviations undefined for zero goals: {zero_goals}")
    work = cmp_prog.copy()
    prog = work.program
    dev_over: dict[str, int] = {}
    dev_under: dict[str, int] = {}
    for g in cmp_prog.instance.groups:
        gid = g.id
        goal = cfg.goals[gid]
        room = max(0.0, cfg.bounds[gid] - goal)
        d_plus = prog.add_var(f"over_{gid}", lb=0.0, ub=room)
        d_minus = prog.add_var(f"under_{gid}", lb=0.0, ub=goal)
        lam = prog.add_var(f"side_{gid}", binary=True)
        prog.add_constr({work.n1[gid]: 1.0, d_plus: -1.0, d_minus: 1.0},
                        EQ, goal, name=f"gpm_dev_{gid}")
        prog.add_constr({d_plus: 1.0, lam: -room}, LE, 0.0,
                        name=f"gpm_comp_over_{gid}")
        prog.add_constr({d_minus: 1.0, lam: goal}, LE, goal,
                        name=f"gpm_comp_under_{gid}")
        dev_over[gid] = d_plus
        dev_under[gid] = d_minus

    def scale(gid: str) -> float:
        return 1.0 / cfg.goals[gid] if cfg.relative else 1.0

    if mode == "sum":
        objective = {}
        for gid in dev_over:
            objective[dev_over[gid]] = -cfg.w_over(gid) * scale(gid)
            objective[dev_under[gid]] = -cfg.w_under(gid) * scale(gid)
        prog.set_objective(objective)
    else:
        worst = prog.add_var("worst_under", lb=0.0)
        for gid in dev_under:
            prog.add_constr({worst: 1.0, dev_under[gid]: -cfg.w_under(gid) * scale(gid)},
                            GE, 0.0, name=f"gpm_worst_{gid}")
        prog.set_objective({worst: -1.0})

    status = solve(prog, backend=backend)
    if status.status == "infeasible":
        return _failed("gpm", status)
    if not status.is_optimal:
        raise SolverError(f"GPM solve failed: {status.status} {status.message}")
    caseload = work.extract_caseload(status)
    utilities = _relative_utilities(cfg, caseload)
    res = _result_from_caseload(work, "gpm", status, caseload, utilities, backend)
    res.objective_value = -status.objective  # minimized deviation measure
    comp = max(status.value(dev_over[g]) * status.value(dev_under[g])
               for g in dev_over)
    res.details = {"mode": mode, "relative": cfg.relative,
                   "deviation_objective": -status.objective,
                   "over": {g: status.value(v) for g, v in dev_over.items()},
                   "under": {g: status.value(v) for g, v in dev_under.items()},
                   "complementarity_max": comp}
    return res


@dataclass(frozen=True)
class RepairStrategy:
    """Second-stage improvement of a possibly dominated caseload."""

    kind: str  # "preference" | "sum-overachieve" | "tradeoff"
    group: str | None = None
    weights_over: dict[str, float] = field(default_factory=dict)
    weights_under: dict[str, float] = field(default_factory=dict)
    eps_plus: float = 1.0
    eps_minus: float = 1e6  # large: effectively forbids under-achievement

    def __post_init__(self):
        if self.kind not in ("preference", "sum-overachieve", "tradeoff"):
            raise ScalarizeError(f"unknown repair strategy {self.kind!r}")
        if self.kind == "preference" and not self.group:
            raise ScalarizeError("preference repair needs a target group")


def repair(cmp_prog: CmpProgram, base: Caseload, strategy: RepairStrategy,
           backend: str | None = None) -> SolveResult:
    """Re-optimize from a base caseload without losing any group's output
    (except, for the tradeoff strategy, where explicitly priced)."""
    work = cmp_prog.copy()
    prog = work.program
    method = f"repair:{strategy.kind}"

    def floor_of(gid: str) -> float:
        base_n = base.group_totals.get(gid, 0.0)
        return base_n - 1e-7 * max(1.0, base_n)

    if strategy.kind == "preference":
        if strategy.group not in work.n1:
            raise ScalarizeError(f"unknown group {strategy.group!r}")
        for gid in work.n1:
            if gid != strategy.group and floor_of(gid) > 0:
                prog.add_constr({work.n1[gid]: 1.0}, GE, floor_of(gid),
                                name=f"hold_{gid}")
        prog.set_objective({work.n1[strategy.group]: 1.0})
    elif strategy.kind == "sum-overachieve":
        for gid in work.n1:
            if floor_of(gid) > 0:
                prog.add_constr({work.n1[gid]: 1.0}, GE, floor_of(gid),
                                name=f"hold_{gid}")
        prog.set_objective({work.n1[gid]: strategy.weights_over.get(gid, 1.0)
                            for gid in work.n1})
    else:  # tradeoff: goals at base, over rewarded, under priced
        objective: dict[int, float] = {}
        for gid in work.n1:
            goal = base.group_totals.get(gid, 0.0)
            d_plus = prog.add_var(f"over_{gid}", lb=0.0)
            d_minus = prog.add_var(f"under_{gid}", lb=0.0, ub=max(goal, 0.0))
            lam = prog.add_var(f"side_{gid}", binary=True)
            prog.add_constr({work.n1[gid]: 1.0, d_plus: -1.0, d_minus: 1.0},
                            EQ, goal, name=f"dev_{gid}")
            big = max(1.0, cmp_prog.upper_bounds.get(gid, 0.0) or 0.0,
                      goal)
            prog.add_constr({d_plus: 1.0, lam: -big}, LE, 0.0,
                            name=f"comp_over_{gid}")
            prog.add_constr({d_minus: 1.0, lam: max(goal, 0.0)}, LE,
                            max(goal, 0.0), name=f"comp_under_{gid}")
            objective[d_plus] = strategy.eps_plus * strategy.weights_over.get(gid, 1.0)
            objective[d_minus] = -strategy.eps_minus * strategy.weights_under.get(gid, 1.0)
        prog.set_objective(objective)

    status = solve(prog, backend=backend)
    if status.status == "infeasible":
        return _failed(method, status)
    if not status.is_optimal:
        raise SolverError(f"repair solve failed: {status.status} {status.message}")
    caseload = work.extract_caseload(status)
    res = _result_from_caseload(work, method, status, caseload, None, backend)
    res.details = {"strategy": strategy.kind, "group": strategy.group,
                   "base_total": base.total}
    return res
