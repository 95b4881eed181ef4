"""Export an AbstractProgram in the standard LP text format for external debugging."""
from __future__ import annotations

import re

from .program import AbstractProgram, LE, GE, EQ

_SENSE = {LE: "<=", GE: ">=", EQ: "="}


def _num(x: float) -> str:
    # 17 significant digits: round-trips IEEE doubles exactly
    return repr(float(x))


def _safe(name: str, idx: int) -> str:
    clean = re.sub(r"[^A-Za-z0-9_.]", "_", name) if name else ""
    if not clean or clean[0].isdigit():
        clean = f"x{idx}_{clean}" if clean else f"x{idx}"
    return clean


def write_lp(program: AbstractProgram, path: str) -> None:
    names = [_safe(program.var_name(i), i) for i in range(program.num_vars)]
    seen: dict[str, int] = {}
    for i, nm in enumerate(names):
        if nm in seen:
            names[i] = f"{nm}__{i}"
        seen[names[i]] = i

    def terms(coeffs: dict[int, float]) -> str:
        parts = []
        for idx in sorted(coeffs):
            c = coeffs[idx]
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {_num(abs(c))} {names[idx]}")
        if not parts:
            return "0 " + (names[0] if names else "x0")
        joined = " ".join(parts)
        return joined[2:] if joined.startswith("+ ") else joined

    lines = [f"\\ {program.name}", "Maximize", f" obj: {terms(program.objective)}",
             "Subject To"]
    for k, con in enumerate(program.constraints):
        label = _safe(con.name, k) if con.name else f"c{k}"
        lines.append(f" {label}: {terms(con.coeffs)} {_SENSE[con.sense]} {_num(con.rhs)}")
    lines.append("Bounds")
    for i in range(program.num_vars):
        lb, ub = program.var_bounds(i)
        if program.is_binary(i):
            continue
        if lb is None and ub is None:
            lines.append(f" {names[i]} free")
        elif lb is None:
            lines.append(f" -inf <= {names[i]} <= {_num(ub)}")
        elif ub is None:
            if lb != 0.0:
                lines.append(f" {names[i]} >= {_num(lb)}")
        else:
            lines.append(f" {_num(lb)} <= {names[i]} <= {_num(ub)}")
    binaries = program.binary_indices
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(names[i] for i in binaries))
    lines.append("End")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
