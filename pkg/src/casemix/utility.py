"""Utility-function catalog: piecewise-linear representation and templates.

A utility function maps a patient group's output rate to an achievement
score (usually 0..100, negative below an intercept for the regret-style
templates). All functions are represented as piecewise-linear curves over
[0, domain_max]:

* ``breakpoints`` is a nondecreasing list of output values;
* ``slopes`` has one entry more than ``breakpoints`` (the pieces between
  consecutive breakpoints, plus the piece after the last one);
* a *duplicated* breakpoint encodes a discontinuity: the slope entry
  between the two copies is read as an absolute jump height instead of a
  slope. The value at the jump point itself is the post-jump value
  (right-closed convention).

Nonlinear shapes (powers, exponentials, sigmoids, beta humps) are sampled
onto a uniform grid and carried as ordinary piecewise-linear curves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

CATALOG = ("UF1", "UF2", "UF3", "UF4", "UF5", "UF6", "UF7",
           "UF8", "UF9", "UF10", "UF11", "UF12", "UF13", "UF14")

DEFAULT_SAMPLE_POINTS = 30
_REL_TOL = 1e-9


class UtilityError(ValueError):
    """Invalid utility specification or out-of-domain evaluation."""


@dataclass(frozen=True)
class PlfSegment:
    """One linear piece on [start, end); the final piece is closed at end."""

    start: float
    end: float
    value_at_start: float
    slope: float
    open_right: bool = False  # a discontinuity immediately follows

    def value_at(self, x: float) -> float:
        return self.value_at_start + self.slope * (x - self.start)

    @property
    def value_at_end(self) -> float:
        return self.value_at(self.end)


@dataclass(frozen=True)
class PiecewiseLinearUtility:
    anchor: float
    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    domain_max: float

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "slopes", tuple(float(s) for s in self.slopes))
        if not math.isfinite(self.anchor):
            raise UtilityError("anchor must be finite")
        if self.domain_max <= 0 or not math.isfinite(self.domain_max):
            raise UtilityError("domain_max must be positive and finite")
        if len(self.slopes) != len(self.breakpoints) + 1:
            raise UtilityError("need exactly one more slope than breakpoints")
        tol = _REL_TOL * self.domain_max
        prev = 0.0
        run = 1
        for b in self.breakpoints:
            if not math.isfinite(b):
                raise UtilityError("breakpoints must be finite")
            if b < -tol or b > self.domain_max + tol:
                raise UtilityError(f"breakpoint {b} outside [0, {self.domain_max}]")
            if b < prev - tol:
                raise UtilityError("breakpoints must be nondecreasing")
            run = run + 1 if b == prev else 1
            if run > 2:
                raise UtilityError("more than two equal consecutive breakpoints")
            prev = b
        if any(not math.isfinite(s) for s in self.slopes):
            raise UtilityError("slopes must be finite")

    # -- structure -----------------------------------------------------------
    def segments(self) -> list[PlfSegment]:
        """Contiguous pieces covering [0, domain_max], jumps folded in."""
        cached = self.__dict__.get("_segments")
        if cached is not None:
            return cached
        segs: list[PlfSegment] = []
        cur_x, cur_v = 0.0, self.anchor
        si = 0
        k = 0
        bps = self.breakpoints
        n = len(bps)

        def emit(end: float, slope: float, open_right: bool):
            nonlocal cur_x, cur_v
            if end > cur_x:
                segs.append(PlfSegment(cur_x, end, cur_v, slope, open_right))
                cur_v += slope * (end - cur_x)
                cur_x = end

        while k < n:
            dup = k + 1 < n and bps[k + 1] == bps[k]
            emit(bps[k], self.slopes[si], open_right=dup)
            if dup:
                if segs and segs[-1].end == bps[k] and not segs[-1].open_right:
                    segs[-1] = PlfSegment(segs[-1].start, segs[-1].end,
                                          segs[-1].value_at_start, segs[-1].slope,
                                          open_right=True)
                cur_v += self.slopes[si + 1]  # jump height
                si += 2
                k += 2
            else:
                si += 1
                k += 1
        if self.domain_max > cur_x:
            segs.append(PlfSegment(cur_x, self.domain_max, cur_v, self.slopes[si]))
        elif not segs or segs[-1].open_right or segs[-1].end < self.domain_max:
            segs.append(PlfSegment(cur_x, cur_x, cur_v, 0.0))
        object.__setattr__(self, "_segments", segs)
        return segs

    def jumps(self) -> list[tuple[float, float]]:
        out = []
        bps = self.breakpoints
        k = 0
        si = 0
        while k < len(bps):
            if k + 1 < len(bps) and bps[k + 1] == bps[k]:
                out.append((bps[k], self.slopes[si + 1]))
                si += 2
                k += 2
            else:
                si += 1
                k += 1
        return out

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, n: float) -> float:
        tol = _REL_TOL * max(1.0, self.domain_max)
        if n < -tol or n > self.domain_max + tol:
            raise UtilityError(f"output {n} outside domain [0, {self.domain_max}]")
        n = min(max(n, 0.0), self.domain_max)
        segs = self.segments()
        chosen = segs[0]
        for seg in segs:
            if seg.start <= n:
                chosen = seg
            else:
                break
        return chosen.value_at(n)

    def snap_output(self, n: float, tol: float | None = None) -> float:
        """Snap an output sitting a float-ulp below a jump onto the jump.

        Solvers that select the post-jump piece may return the jump
        abscissa with rounding error; the tolerance stays far below the
        half-open boundary epsilon, so deliberate pre-jump points are
        never moved.
        """
        if tol is None:
            tol = 1e-9 * max(1.0, self.domain_max)
        for x_j, _ in self.jumps():
            if 0.0 < x_j - n <= tol:
                return x_j
        return n

    def is_concave(self) -> bool:
        if self.jumps():
            return False
        segs = [s for s in self.segments() if s.end > s.start]
        scale = max((abs(s.slope) for s in segs), default=1.0)
        tol = 1e-9 * max(1.0, scale)
        return all(segs[i + 1].slope <= segs[i].slope + tol
                   for i in range(len(segs) - 1))

    def value_range(self) -> tuple[float, float]:
        """Min/max of the curve over [0, domain_max]."""
        vals = [self.anchor]
        for seg in self.segments():
            vals.append(seg.value_at_start)
            vals.append(seg.value_at_end)
        return min(vals), max(vals)

    # -- serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        return {"anchor": self.anchor,
                "breakpoints": list(self.breakpoints),
                "slopes": list(self.slopes),
                "domain_max": self.domain_max}

    @classmethod
    def from_dict(cls, d: Mapping) -> "PiecewiseLinearUtility":
        return cls(anchor=float(d["anchor"]),
                   breakpoints=tuple(d["breakpoints"]),
                   slopes=tuple(d["slopes"]),
                   domain_max=float(d["domain_max"]))


def evaluate(plf: PiecewiseLinearUtility, n: float) -> float:
    return plf.evaluate(n)


def is_concave(plf: PiecewiseLinearUtility) -> bool:
    return plf.is_concave()


# ---------------------------------------------------------------------------
# nonlinear closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonlinearCurve:
    """Closed-form curve sampled into a PLF. ``kind`` selects the family."""

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def evaluate(self, n: float, upper_bound: float) -> float:
        x = n / upper_bound
        p = self.params
        if self.kind == "uf1-power":
            return 100.0 * x ** p["alpha"]
        if self.kind == "uf1-exp":
            alpha = p.get("alpha", math.log(101.0))
            return math.exp(alpha * x) - 1.0
        if self.kind == "uf1-complement-power":
            return 100.0 * (1.0 - (1.0 - x) ** p["beta"])
        if self.kind == "uf1-calibrated-exp":
            delta = 100.0 / (math.e - 1.0)  # pins the value at x=1 to 100
            return delta * (math.exp(x ** p["alpha"]) - 1.0)
        if self.kind == "uf2-power":
            ni = p["indifference"]
            return 100.0 * (max(n - ni, 0.0) / (upper_bound - ni)) ** p["alpha"]
        if self.kind == "uf3-power":
            na = p["aspiration"]
            return 100.0 * (min(n, na) / na) ** p["alpha"]
        if self.kind == "uf6-beta":
            return p["delta"] * x ** p["alpha"] * (1.0 - x) ** p["beta"]
        if self.kind == "uf7-sigmoid":
            return 100.0 / (1.0 + math.exp(-p["steepness"] * (x - p["zeta"])))
        raise UtilityError(f"unknown curve kind {self.kind!r}")


def sample_nonlinear(curve: NonlinearCurve, upper_bound: float,
                     num_points: int = DEFAULT_SAMPLE_POINTS) -> PiecewiseLinearUtility:
    """Sample a closed-form curve on a uniform grid into a PLF.

    Grid of ``num_points`` points spans [0, upper_bound]; chord slopes make
    the PLF exact at every sample point.
    """
    if num_points < 2:
        raise UtilityError("num_points must be at least 2")
    xs = np.linspace(0.0, upper_bound, num_points)
    try:
        vals = [curve.evaluate(float(x), upper_bound) for x in xs]
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise UtilityError(f"curve {curve.kind} undefined on [0, {upper_bound}]: {exc}")
    if any(not math.isfinite(v) for v in vals):
        bad = xs[[not math.isfinite(v) for v in vals]][0]
        raise UtilityError(f"curve {curve.kind} non-finite at {bad}")
    delta = xs[1] - xs[0]
    slopes = [(vals[i] - vals[i - 1]) / delta for i in range(1, num_points)]
    slopes.append(0.0)
    return PiecewiseLinearUtility(anchor=vals[0],
                                  breakpoints=tuple(xs[1:]),
                                  slopes=tuple(slopes),
                                  domain_max=upper_bound)


# ---------------------------------------------------------------------------
# template catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UfSpec:
    """One catalog template plus parameters.

    Threshold parameters (indifference / aspiration / reference) may be
    given in output units or as a percentage of the group's upper bound
    using the ``*_pct`` key variants.
    """

    template: str
    params: Mapping[str, float] = field(default_factory=dict)
    weight: float = 1.0

    def __post_init__(self):
        if self.template not in CATALOG:
            raise UtilityError(f"unknown template {self.template!r}")
        if self.weight <= 0:
            raise UtilityError("weight must be positive")
        object.__setattr__(self, "params", dict(self.params))

    def to_dict(self) -> dict:
        return {"template": self.template, "params": dict(self.params),
                "weight": self.weight}

    @classmethod
    def from_dict(cls, d: Mapping) -> "UfSpec":
        known = {"template", "weight"}
        params = dict(d.get("params", {}))
        params.update({k: v for k, v in d.items() if k not in known | {"params"}})
        return cls(template=d["template"], params=params,
                   weight=float(d.get("weight", 1.0)))


_PCT_KEYS = ("indifference", "aspiration", "reference")


def resolve_params(spec: UfSpec, upper_bound: float) -> dict[str, float]:
    """Resolve percentage parameters against the upper bound; validate ranges."""
    if upper_bound <= 0:
        raise UtilityError("upper bound must be positive")
    out: dict[str, float] = {}
    for key, val in spec.params.items():
        if key.endswith("_pct"):
            base = key[:-4]
            if base not in _PCT_KEYS:
                raise UtilityError(f"unknown percentage parameter {key!r}")
            if not 0.0 <= float(val) <= 100.0:
                raise UtilityError(f"{key} must lie in [0, 100], got {val}")
            if base in spec.params:
                raise UtilityError(f"give either {base!r} or {key!r}, not both")
            out[base] = float(val) / 100.0 * upper_bound
        else:
            out[key] = float(val)
    aspiration = out.get("aspiration")
    tol = _REL_TOL * upper_bound
    if aspiration is not None and aspiration > upper_bound + tol:
        raise UtilityError(
            f"aspiration {aspiration} exceeds the attainable upper bound "
            f"{upper_bound}; cap it at the bound")
    for key in ("indifference", "reference"):
        v = out.get(key)
        if v is not None and (v < -tol or v > upper_bound + tol):
            raise UtilityError(f"{key} {v} outside [0, {upper_bound}]")
    if "alpha" in out and out["alpha"] <= 0:
        raise UtilityError("alpha must be positive")
    if "beta" in out and out["beta"] <= 0:
        raise UtilityError("beta must be positive")
    if "indifference" in out and "aspiration" in out \
            and out["indifference"] >= out["aspiration"]:
        raise UtilityError("indifference point must lie below the aspiration")
    return out


def _require(params: dict, key: str, template: str) -> float:
    if key not in params:
        raise UtilityError(f"{template} requires parameter {key!r}")
    return params[key]


def instantiate(spec: UfSpec, upper_bound: float) -> PiecewiseLinearUtility:
    """Build the PLF for a template at a group's upper bound."""
    ub = float(upper_bound)
    p = resolve_params(spec, ub)
    t = spec.template
    npoints = int(p.get("num_points", DEFAULT_SAMPLE_POINTS))
    alpha = p.get("alpha")

    if t == "UF1":
        variant = spec.params.get("variant", "power")
        if variant == "power" and (alpha is None or alpha == 1.0):
            return PiecewiseLinearUtility(0.0, (ub,), (100.0 / ub, 0.0), ub)
        if variant == "power":
            curve = NonlinearCurve("uf1-power", {"alpha": alpha})
        elif variant == "exp":
            curve = NonlinearCurve("uf1-exp",
                                   {"alpha": p.get("alpha", math.log(101.0))})
        elif variant == "complement":
            curve = NonlinearCurve("uf1-complement-power",
                                   {"beta": _require(p, "beta", t)})
        elif variant == "calibrated_exp":
            curve = NonlinearCurve("uf1-calibrated-exp",
                                   {"alpha": _require(p, "alpha", t)})
        else:
            raise UtilityError(f"unknown UF1 variant {variant!r}")
        return sample_nonlinear(curve, ub, npoints)

    if t == "UF2":
        ni = _require(p, "indifference", t)
        if ni >= ub:
            raise UtilityError("UF2 indifference point must lie below the upper bound")
        if alpha is not None and alpha != 1.0:
            return sample_nonlinear(
                NonlinearCurve("uf2-power", {"indifference": ni, "alpha": alpha}),
                ub, npoints)
        if ni <= 0.0:
            return PiecewiseLinearUtility(0.0, (ub,), (100.0 / ub, 0.0), ub)
        return PiecewiseLinearUtility(0.0, (ni,), (0.0, 100.0 / (ub - ni)), ub)

    if t == "UF3":
        na = _require(p, "aspiration", t)
        if na <= 0:
            raise UtilityError("UF3 aspiration must be positive")
        if alpha is not None and alpha != 1.0:
            return sample_nonlinear(
                NonlinearCurve("uf3-power", {"aspiration": na, "alpha": alpha}),
                ub, npoints)
        return PiecewiseLinearUtility(0.0, (min(na, ub),), (100.0 / na, 0.0), ub)

    if t == "UF4":
        ni = _require(p, "indifference", t)
        na = _require(p, "aspiration", t)
        if ni <= 0.0:
            return instantiate(UfSpec("UF3", {"aspiration": na}, spec.weight), ub)
        return PiecewiseLinearUtility(
            0.0, (ni, min(na, ub)), (0.0, 100.0 / (na - ni), 0.0), ub)

    if t == "UF5":
        ni = _require(p, "indifference", t)
        if ni >= ub:
            raise UtilityError("UF5 intercept must lie below the upper bound")
        anchor = -100.0 * ni / (ub - ni)
        return PiecewiseLinearUtility(anchor, (ub,), (100.0 / (ub - ni), 0.0), ub)

    if t == "UF6":
        if alpha is not None or "beta" in p:
            a = p.get("alpha", 1.0)
            b = p.get("beta", 1.0)
            xs = np.linspace(0.0, 1.0, npoints)
            raw = xs ** a * (1.0 - xs) ** b
            peak = float(raw.max())
            if peak <= 0:
                raise UtilityError("UF6 shape parameters give a flat curve")
            curve = NonlinearCurve("uf6-beta",
                                   {"alpha": a, "beta": b, "delta": 100.0 / peak})
            return sample_nonlinear(curve, ub, npoints)
        na = _require(p, "aspiration", t)
        if na <= 0:
            raise UtilityError("UF6 aspiration must be positive")
        if na >= ub:
            return PiecewiseLinearUtility(0.0, (ub,), (100.0 / ub, 0.0), ub)
        return PiecewiseLinearUtility(
            0.0, (na,), (100.0 / na, -100.0 / (ub - na)), ub)

    if t == "UF7":
        zeta = p.get("reference", 0.5 * ub) / ub
        steep = p.get("steepness", 20.0)
        if steep <= 0:
            raise UtilityError("UF7 steepness must be positive")
        curve = NonlinearCurve("uf7-sigmoid", {"steepness": steep, "zeta": zeta})
        return sample_nonlinear(curve, ub, npoints)

    if t == "UF8":
        ni = _require(p, "indifference", t)
        return PiecewiseLinearUtility(0.0, (ni, ni), (0.0, 100.0, 0.0), ub)

    if t == "UF9":
        ni = _require(p, "indifference", t)
        na = _require(p, "aspiration", t)
        tier = _require(p, "tier_utility", t)
        if not 0.0 <= tier <= 100.0:
            raise UtilityError("UF9 tier utility must lie in [0, 100]")
        return PiecewiseLinearUtility(
            0.0, (ni, ni, min(na, ub), min(na, ub)),
            (0.0, tier, 0.0, 100.0 - tier, 0.0), ub)

    if t == "UF10":
        na = _require(p, "aspiration", t)
        eps = p.get("payoff_tolerance", 1e-6 * ub)
        lo, hi = max(0.0, na - eps), min(ub, na + eps)
        if lo <= 0.0 and hi >= ub:
            return PiecewiseLinearUtility(100.0, (ub,), (0.0, 0.0), ub)
        if lo <= 0.0:
            return PiecewiseLinearUtility(100.0, (hi, hi), (0.0, -100.0, 0.0), ub)
        if hi >= ub:
            return PiecewiseLinearUtility(0.0, (lo, lo), (0.0, 100.0, 0.0), ub)
        return PiecewiseLinearUtility(
            0.0, (lo, lo, hi, hi), (0.0, 100.0, 0.0, -100.0, 0.0), ub)

    if t == "UF11":
        goal = _require(p, "aspiration", t)
        if goal <= 0:
            raise UtilityError("UF11 goal must be positive")
        income = p.get("income", 100.0 / ub)
        penalty = p.get("penalty", income)
        anchor = -goal * penalty
        return PiecewiseLinearUtility(anchor, (min(goal, ub),),
                                      (income + penalty, income), ub)

    if t == "UF12":
        goal = _require(p, "indifference", t)
        rate = p.get("income", 100.0 / ub)
        return PiecewiseLinearUtility(0.0, (goal, goal),
                                      (0.0, rate * goal, rate), ub)

    if t == "UF13":
        goal = _require(p, "indifference", t)
        rate = p.get("income", 100.0 / ub)
        penalty = p.get("penalty", rate)
        return PiecewiseLinearUtility(-penalty * goal, (goal, goal),
                                      (penalty, rate * goal, rate), ub)

    if t == "UF14":
        goal = _require(p, "indifference", t)
        penalty = p.get("penalty", 100.0 / ub)
        if goal <= 0:
            return PiecewiseLinearUtility(0.0, (ub,), (0.0, 0.0), ub)
        return PiecewiseLinearUtility(-penalty * goal, (goal,), (penalty, 0.0), ub)

    raise UtilityError(f"template {t} not implemented")


# Descriptive metadata consumed by the config loader, CLI help, and the UI.
TEMPLATE_INFO: dict[str, dict] = {
    "UF1": {"label": "Linear increasing",
            "params": [], "optional": ["alpha", "variant", "beta", "num_points"]},
    "UF2": {"label": "Increasing above an indifference point",
            "params": ["indifference"], "optional": ["alpha", "num_points"]},
    "UF3": {"label": "Increasing to an aspiration plateau",
            "params": ["aspiration"], "optional": ["alpha", "num_points"]},
    "UF4": {"label": "Indifference point then plateau",
            "params": ["indifference", "aspiration"], "optional": []},
    "UF5": {"label": "Linear with negative start",
            "params": ["indifference"], "optional": []},
    "UF6": {"label": "Triangular (single apex)",
            "params": ["aspiration"], "optional": ["alpha", "beta", "num_points"]},
    "UF7": {"label": "S-shaped around a reference point",
            "params": ["reference"], "optional": ["steepness", "num_points"]},
    "UF8": {"label": "One tier (all-or-nothing)",
            "params": ["indifference"], "optional": []},
    "UF9": {"label": "Two tiers",
            "params": ["indifference", "aspiration", "tier_utility"], "optional": []},
    "UF10": {"label": "Single payoff point",
             "params": ["aspiration"], "optional": ["payoff_tolerance"]},
    "UF11": {"label": "Linear reward with regret below goal",
             "params": ["aspiration"], "optional": ["income", "penalty"]},
    "UF12": {"label": "Zero below goal, jump then linear",
             "params": ["indifference"], "optional": ["income"]},
    "UF13": {"label": "Regret below goal, jump then linear",
             "params": ["indifference"], "optional": ["income", "penalty"]},
    "UF14": {"label": "Regret only (flat above goal)",
             "params": ["indifference"], "optional": ["penalty"]},
}
