"""Exact encoding of piecewise-linear utilities into LP/MILP constraints.

Three routes, picked automatically:

* concave curves whose utility variable is only ever pushed upward get the
  epigraph encoding (one <= row per piece, no binaries);
* curves whose discontinuities all jump upward (the catalog's tiered
  shapes) get the incremental-fill encoding: pieces are filled strictly
  left to right through bounded fill variables, one ordering binary per
  boundary, and the utility is an exact linear expression of the fills.
  Its relaxation is hull-tight, which keeps branch-and-bound shallow even
  for 30-piece sampled curves;
* anything with a downward jump falls back to binary piece selection with
  big-M rows (one indicator per piece). Pieces that end at a
  discontinuity are half-open there; the right boundary is pulled in by a
  small epsilon so the jump point itself belongs to the upper piece,
  matching PiecewiseLinearUtility.evaluate.
"""
from __future__ import annotations

from ..utility import PiecewiseLinearUtility, PlfSegment
from .program import AbstractProgram, SolverError, LE, GE, EQ

MAX_SEGMENTS = 64
_OPEN_EPS_REL = 1e-7


def encode_plf(program: AbstractProgram, x: int, plf: PiecewiseLinearUtility,
               name: str = "u", force_binary: bool = False) -> int:
    """Add a utility variable tied to ``x`` through the curve; returns its index.

    ``x`` must already be bounded within [0, domain_max]. ``force_binary``
    pins the big-M piece-selection route (mainly for cross-checks).
    """
    lb, ub = program.var_bounds(x)
    if lb is None or lb < -1e-9 or ub is None or ub > plf.domain_max * (1 + 1e-9) + 1e-9:
        raise SolverError(
            f"variable {program.var_name(x)} must be bounded within "
            f"[0, {plf.domain_max}] before a utility curve can be attached")
    segments = plf.segments()
    if len(segments) > MAX_SEGMENTS:
        raise SolverError(
            f"curve has {len(segments)} pieces; cap is {MAX_SEGMENTS}")
    lo_v, hi_v = plf.value_range()
    u = program.add_var(f"{name}", lb=lo_v, ub=hi_v)

    if force_binary:
        _encode_big_m(program, x, u, plf, segments, lo_v, hi_v, name)
    elif plf.is_concave():
        # u <= value_at_start_i + slope_i * (x - start_i) for every piece
        for k, seg in enumerate(segments):
            const = seg.value_at_start - seg.slope * seg.start
            program.add_constr({u: 1.0, x: -seg.slope}, LE, const,
                               name=f"{name}_epi{k}")
    elif all(j >= 0.0 for j in _boundary_jumps(segments)):
        _encode_incremental(program, x, u, segments, name)
    else:
        _encode_big_m(program, x, u, plf, segments, lo_v, hi_v, name)
    return u


def _boundary_jumps(segments: list[PlfSegment]) -> list[float]:
    return [segments[k + 1].value_at_start - segments[k].value_at_end
            for k in range(len(segments) - 1)]


def _encode_incremental(program: AbstractProgram, x: int, u: int,
                        segments: list[PlfSegment], name: str) -> None:
    """x = sum of per-piece fills, filled strictly left to right; u is the
    exact running value including any upward jump credited by the ordering
    binary of its boundary."""
    jumps = _boundary_jumps(segments)
    fills: list[int] = []
    gates: list[int] = []
    for k, seg in enumerate(segments):
        width = seg.end - seg.start
        fills.append(program.add_var(f"{name}_fill{k}", lb=0.0, ub=width))
        if k < len(segments) - 1:
            gates.append(program.add_var(f"{name}_adv{k}", binary=True))
    for k, gate in enumerate(gates):
        width = segments[k].end - segments[k].start
        # piece k must be full before the gate opens ...
        program.add_constr({fills[k]: 1.0, gate: -width}, GE, 0.0,
                           name=f"{name}_full{k}")
        # ... and piece k+1 stays shut until it does
        next_width = segments[k + 1].end - segments[k + 1].start
        if next_width > 0.0:
            program.add_constr({fills[k + 1]: 1.0, gate: -next_width}, LE, 0.0,
                               name=f"{name}_shut{k}")
    x_row: dict[int, float] = {x: 1.0}
    for fill in fills:
        x_row[fill] = x_row.get(fill, 0.0) - 1.0
    program.add_constr(x_row, EQ, segments[0].start, name=f"{name}_xfill")
    u_row: dict[int, float] = {u: 1.0}
    for k, seg in enumerate(segments):
        if seg.slope != 0.0:
            u_row[fills[k]] = u_row.get(fills[k], 0.0) - seg.slope
    for k, gate in enumerate(gates):
        if jumps[k] != 0.0:
            u_row[gate] = u_row.get(gate, 0.0) - jumps[k]
    program.add_constr(u_row, EQ, segments[0].value_at_start,
                       name=f"{name}_ufill")


def _encode_big_m(program: AbstractProgram, x: int, u: int,
                  plf: PiecewiseLinearUtility, segments: list[PlfSegment],
                  lo_v: float, hi_v: float, name: str) -> None:
    eps_open = _OPEN_EPS_REL * plf.domain_max
    indicators = []
    for k, seg in enumerate(segments):
        d = program.add_var(f"{name}_seg{k}", binary=True)
        indicators.append(d)
        right = seg.end - eps_open if seg.open_right else seg.end
        # l_k + M(d-1) <= x <= r_k + M(1-d), with the tightest valid M per
        # side: the slack needed to free x over [0, domain_max]
        m_right = max(plf.domain_max - right, 0.0)
        m_left = max(seg.start, 0.0)
        program.add_constr({x: 1.0, d: m_right}, LE, right + m_right,
                           name=f"{name}_xr{k}")
        program.add_constr({x: 1.0, d: -m_left}, GE, seg.start - m_left,
                           name=f"{name}_xl{k}")
        # line_k(x) + M(d-1) <= u <= line_k(x) + M(1-d); M must cover the
        # line extrapolated over the whole domain, not just the value range
        const = seg.value_at_start - seg.slope * seg.start
        line_lo = min(const, const + seg.slope * plf.domain_max)
        line_hi = max(const, const + seg.slope * plf.domain_max)
        m_u = max(hi_v - line_lo, line_hi - lo_v, 1.0)
        program.add_constr({u: 1.0, x: -seg.slope, d: m_u}, LE, const + m_u,
                           name=f"{name}_ur{k}")
        program.add_constr({u: 1.0, x: -seg.slope, d: -m_u}, GE, const - m_u,
                           name=f"{name}_ul{k}")
    program.add_constr({d: 1.0 for d in indicators}, EQ, 1.0,
                       name=f"{name}_one_seg")
    # upper concave-envelope cuts: redundant at integer points but they give
    # the relaxation the convex-hull ceiling, which big-M rows alone lack
    for k, (px, py, qx, qy) in enumerate(_upper_envelope(segments)):
        if qx <= px:
            continue
        slope = (qy - py) / (qx - px)
        program.add_constr({u: 1.0, x: -slope}, LE, py - slope * px,
                           name=f"{name}_env{k}")


def _upper_envelope(segments) -> list[tuple[float, float, float, float]]:
    """Consecutive point pairs of the upper convex hull of the curve graph."""
    points: list[tuple[float, float]] = []
    for seg in segments:
        points.append((seg.start, seg.value_at_start))
        points.append((seg.end, seg.value_at_end))
    points.sort()
    hull: list[tuple[float, float]] = []
    for p in points:
        while len(hull) >= 2:
            (ax, ay), (bx, by) = hull[-2], hull[-1]
            # drop b if it lies on or below chord a-p
            if (by - ay) * (p[0] - ax) <= (p[1] - ay) * (bx - ax) + 1e-12:
                hull.pop()
            else:
                break
        if hull and abs(hull[-1][0] - p[0]) < 1e-15:
            if p[1] > hull[-1][1]:
                hull[-1] = p
            continue
        hull.append(p)
    return [(hull[i][0], hull[i][1], hull[i + 1][0], hull[i + 1][1])
            for i in range(len(hull) - 1)]
