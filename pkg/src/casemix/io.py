"""Serialization: instance / UF-config loading, result persistence.

Instances and UF configs are JSON (schema v1, published under
``casemix/schemas``). Reports go out as JSON or CSV (comma, dot decimal,
LF, UTF-8); numbers are written at six decimal places.
"""
from __future__ import annotations

import csv
import json
from importlib import resources as importlib_resources
from pathlib import Path

import jsonschema

from .instance import (Activity, HospitalInstance, InstanceError,
                       PatientGroup, Resource, Subtype)
from .pareto import ParetoAudit
from .scalarize import SolveResult
from .sensitivity import SweepReport, case_mix_diff
from .utility import UfSpec, UtilityError, instantiate

BUNDLED_INSTANCE = "princess_alexandra"


def _schema(name: str) -> dict:
    ref = importlib_resources.files("casemix").joinpath(f"schemas/{name}")
    return json.loads(ref.read_text(encoding="utf-8"))


def _validate(payload: dict, schema_name: str) -> None:
    schema = _schema(schema_name)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(payload), key=lambda e: e.json_path)
    if errors:
        first = errors[0]
        raise InstanceError(first.message, path=first.json_path)


def load_instance(source: str | Path | dict) -> HospitalInstance:
    """Load and fully validate an instance; errors carry a JSON path."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            payload = json.load(f)
    else:
        payload = source
    _validate(payload, "instance.schema.json")
    resources = tuple(
        Resource(id=r["id"], kind=r["kind"], bed_count=r.get("bed_count", 1),
                 weekly_hours=r["weekly_hours"])
        for r in payload["resources"])
    groups = []
    for gi, g in enumerate(payload["groups"]):
        try:
            subtypes = tuple(
                Subtype(id=s["id"], mix_fraction=s["mix_fraction"],
                        activities=tuple(
                            Activity(id=a["id"],
                                     duration_hours=a["duration_hours"],
                                     eligible_resources=tuple(a["eligible_resources"]))
                            for a in s["activities"]))
                for s in g["subtypes"])
            groups.append(PatientGroup(id=g["id"], subtypes=subtypes,
                                       group_mix=g.get("group_mix"),
                                       treatment_limit=g.get("treatment_limit")))
        except InstanceError as exc:
            raise InstanceError(str(exc), path=f"$.groups[{gi}]") from exc
    try:
        return HospitalInstance(resources=resources, groups=tuple(groups),
                                horizon_weeks=payload["horizon_weeks"],
                                name=payload.get("name", "instance"))
    except InstanceError as exc:
        raise InstanceError(str(exc), path="$") from exc


def save_instance(instance: HospitalInstance, path: str | Path) -> None:
    payload = {
        "schema_version": 1,
        "name": instance.name,
        "horizon_weeks": instance.horizon_weeks,
        "resources": [
            {"id": r.id, "kind": r.kind, "bed_count": r.bed_count,
             "weekly_hours": r.weekly_hours}
            for r in instance.resources],
        "groups": [
            {"id": g.id,
             **({"group_mix": g.group_mix} if g.group_mix is not None else {}),
             **({"treatment_limit": g.treatment_limit}
                if g.treatment_limit is not None else {}),
             "subtypes": [
                 {"id": s.id, "mix_fraction": s.mix_fraction,
                  "activities": [
                      {"id": a.id, "duration_hours": a.duration_hours,
                       "eligible_resources": list(a.eligible_resources)}
                      for a in s.activities]}
                 for s in g.subtypes]}
            for g in instance.groups],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def bundled_instance_path() -> Path:
    ref = importlib_resources.files("casemix").joinpath(
        f"data/{BUNDLED_INSTANCE}.json")
    return Path(str(ref))


def load_bundled_instance() -> HospitalInstance:
    return load_instance(bundled_instance_path())


# -- UF configuration --------------------------------------------------------

def load_uf_config(source: str | Path | dict,
                   bounds: dict[str, float]) -> dict[str, UfSpec]:
    """Load per-group utility specs; a ``default`` entry covers all groups.

    Every spec is trial-instantiated against its group's upper bound so
    invalid parameter combinations (an aspiration above the attainable
    bound, an indifference point at or above it, ...) are rejected here,
    before any solve.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            payload = json.load(f)
    else:
        payload = source
    _validate(payload, "uf_config.schema.json")
    unknown = [k for k in payload if k != "default" and k not in bounds]
    if unknown:
        raise UtilityError(f"config names unknown groups: {unknown}")
    default = payload.get("default")
    out: dict[str, UfSpec] = {}
    for gid in bounds:
        entry = payload.get(gid, default)
        if entry is None:
            raise UtilityError(
                f"no utility configured for group {gid} and no default given")
        spec = UfSpec.from_dict(entry)
        try:
            instantiate(spec, bounds[gid])
        except UtilityError as exc:
            raise UtilityError(f"group {gid}: {exc}") from exc
        out[gid] = spec
    return out


def save_uf_config(config: dict[str, UfSpec], path: str | Path) -> None:
    payload = {}
    for gid, spec in config.items():
        entry = {"template": spec.template, **dict(spec.params)}
        if spec.weight != 1.0:
            entry["weight"] = spec.weight
        payload[gid] = entry
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


# -- result persistence -------------------------------------------------------

_DECIMALS = 6


def _round_floats(obj):
    if isinstance(obj, float):
        return round(obj, _DECIMALS)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def write_result(obj, path: str | Path, format: str = "json") -> None:
    """Persist a SolveResult, ParetoAudit, or SweepReport."""
    if format not in ("json", "csv"):
        raise ValueError(f"unsupported format {format!r}")
    if format == "json":
        if isinstance(obj, (SolveResult, ParetoAudit, SweepReport)):
            payload = obj.to_dict()
        elif isinstance(obj, dict):
            payload = obj
        else:
            raise TypeError(f"cannot serialize {type(obj).__name__}")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_round_floats(payload), f, indent=2)
            f.write("\n")
        return
    if isinstance(obj, SweepReport):
        write_sweep_csv(obj, path)
    elif isinstance(obj, dict):  # e.g. bounds table
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["group", "upper_bound"])
            for gid, val in obj.items():
                writer.writerow([gid, _fmt(float(val))])
            writer.writerow(["TOTAL", _fmt(float(sum(obj.values())))])
    else:
        raise TypeError(f"CSV output not defined for {type(obj).__name__}")


def write_sweep_csv(report: SweepReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["value", "objective", "N", "sum_u", "min_u", "zeroed"])
        for row in report.rows:
            value = "|".join(str(v) for v in row.value) \
                if isinstance(row.value, (tuple, list)) else row.value
            writer.writerow([value, row.objective, _fmt(row.total_output),
                             _fmt(row.sum_utility), _fmt(row.min_utility),
                             _fmt(row.zeroed)])


def write_case_mix_csv(report: SweepReport, path: str | Path) -> None:
    groups = list(report.bounds)
    diff = case_mix_diff(report)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["value", "objective"] + groups)
        for row in report.rows:
            if not row.case_mix_pct:
                continue
            value = "|".join(str(v) for v in row.value) \
                if isinstance(row.value, (tuple, list)) else row.value
            writer.writerow([value, row.objective]
                            + [_fmt(row.case_mix_pct.get(g)) for g in groups])
        for stat in ("min_pct", "max_pct", "range"):
            writer.writerow([stat, ""]
                            + [_fmt(diff[g][stat]) if g in diff else ""
                               for g in groups])
