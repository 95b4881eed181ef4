"""Command-line front door.

Exit codes: 0 success, 1 solver infeasible / zeroed solution, 2 usage or
validation error, 3 internal error. Results go to stdout as JSON unless
--out is given; logs go to stderr. The backend is chosen with --backend
or the CASEMIX_SOLVER environment variable.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import io as cio
from .instance import Caseload, InstanceError
from .model import build_model, compute_upper_bounds
from .pareto import check_pareto
from .reports import render_sweep_figures
from .scalarize import (AsfConfig, GoalConfig, RepairStrategy, ScalarizeError,
                        repair, solve_asf, solve_gam, solve_gpm)
from .sensitivity import SweepError, SweepSpec, run_sweep
from .solver import SolverError, resolve_backend
from .utility import UtilityError, instantiate

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

_VALIDATION_ERRORS = (InstanceError, UtilityError, ScalarizeError, SweepError,
                      json.JSONDecodeError)


def _log(msg: str) -> None:
    click.echo(msg, err=True)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        _log(f"wrote {out}")
    else:
        click.echo(text)


def _load_instance(path: str):
    if path == "bundled":
        return cio.load_bundled_instance()
    return cio.load_instance(path)


@click.group()
def cli() -> None:
    """Case-mix planning workbench."""


@cli.command()
@click.argument("instance_path")
@click.option("--out", default=None, help="write instead of printing")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
@click.option("--backend", default=None)
def bounds(instance_path: str, out: str | None, fmt: str, backend: str | None):
    """Per-group attainable upper bounds (with the grand total)."""
    instance = _load_instance(instance_path)
    values = compute_upper_bounds(instance, backend=resolve_backend(backend))
    if out and fmt == "csv":
        cio.write_result(values, out, format="csv")
        _log(f"wrote {out}")
    else:
        payload = {"bounds": {g: round(v, 6) for g, v in values.items()},
                   "total": round(sum(values.values()), 6)}
        _emit(payload, out)


def _parse_goals(goals: str, bounds_map: dict[str, float]) -> dict[str, float]:
    if goals == "bounds":
        return dict(bounds_map)
    with open(goals, encoding="utf-8") as f:
        raw = json.load(f)
    return {g: float(v) for g, v in raw.items()}


@cli.command()
@click.argument("instance_path")
@click.argument("uf_config", required=False)
@click.option("--objective", type=click.Choice(["mmu", "msu", "asf"]),
              default="mmu")
@click.option("--eps1", type=float, default=None)
@click.option("--eps2", type=float, default=None)
@click.option("--method", type=click.Choice(["ufm", "gam", "gpm"]),
              default="ufm")
@click.option("--goals", default="bounds",
              help='"bounds" or a JSON file of per-group goals')
@click.option("--gam-weights", type=click.Choice(["absolute", "relative"]),
              default="absolute")
@click.option("--gpm-mode", type=click.Choice(["sum", "minimax-under"]),
              default="sum")
@click.option("--relative/--no-relative", "relative", default=True,
              help="normalize goal-programming deviations by the goals")
@click.option("--tie-break", type=click.Choice(["none", "min-output", "max-output"]),
              default="none")
@click.option("--repair", "repair_strategy", default=None,
              help="follow-up repair: preference:<GROUP> | sum-overachieve | tradeoff")
@click.option("--backend", default=None)
@click.option("--out", default=None)
def solve(instance_path: str, uf_config: str | None, objective: str,
          eps1: float | None, eps2: float | None, method: str, goals: str,
          gam_weights: str, gpm_mode: str, relative: bool, tie_break: str,
          repair_strategy: str | None, backend: str | None, out: str | None):
    """One scalarized solve (utility method, goal attainment, or goal
    programming), optionally followed by a repair stage."""
    backend = resolve_backend(backend)
    instance = _load_instance(instance_path)
    ub = compute_upper_bounds(instance, backend=backend)
    prog = build_model(instance)

    if method == "ufm":
        if not uf_config:
            raise click.UsageError("the utility method needs a UF config file")
        specs = cio.load_uf_config(uf_config, ub)
        plfs = {g: instantiate(specs[g], ub[g]) for g in ub}
        weights = {g: specs[g].weight for g in specs}
        if objective == "mmu":
            cfg = AsfConfig(1.0 if eps1 is None else eps1, eps2 or 0.0, weights)
        elif objective == "msu":
            cfg = AsfConfig(eps1 or 0.0, 1.0 if eps2 is None else eps2, weights)
        else:
            cfg = AsfConfig(0.0 if eps1 is None else eps1,
                            0.0 if eps2 is None else eps2, weights)
        result = solve_asf(prog, plfs, cfg, backend=backend, tie_break=tie_break)
    else:
        goal_map = _parse_goals(goals, ub)
        cfg = GoalConfig(goals=goal_map, bounds=ub, gam_weights=gam_weights,
                         relative=relative)
        if method == "gam":
            result = solve_gam(prog, cfg, backend=backend)
        else:
            result = solve_gpm(prog, cfg, mode=gpm_mode, backend=backend)

    payload = result.to_dict()
    if repair_strategy and result.is_optimal:
        if repair_strategy.startswith("preference:"):
            strat = RepairStrategy("preference", group=repair_strategy.split(":", 1)[1])
        else:
            strat = RepairStrategy(repair_strategy)
        repaired = repair(prog, result.caseload, strat, backend=backend)
        payload["repair"] = repaired.to_dict()
    _emit(_round(payload), out)
    if not result.is_optimal or result.zeroed:
        sys.exit(EXIT_INFEASIBLE)


def _round(obj):
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round(v) for v in obj]
    return obj


def _parse_values(text: str) -> list:
    """Grid syntax: "10:90:10" (start:stop:step, inclusive) or "10,20,30";
    paired values use "/": "5/95,20/80"."""
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        values = []
        v = start
        while v <= stop + 1e-9:
            values.append(round(v, 9))
            v += step
        return values
    out = []
    for part in text.split(","):
        if "/" in part:
            out.append(tuple(float(p) for p in part.split("/")))
        else:
            out.append(float(part))
    return out


@cli.command()
@click.argument("instance_path")
@click.option("--template", required=True)
@click.option("--param", required=True)
@click.option("--values", required=True, help="10:90:10 or 10,20,30 or 5/95,20/80")
@click.option("--absolute", is_flag=True,
              help="grid in output units instead of % of each bound")
@click.option("--objectives", default="mmu,msu")
@click.option("--fixed", default=None, help="JSON of fixed template parameters")
@click.option("--out", "outdir", required=True, type=click.Path(file_okay=False))
@click.option("--jobs", type=int, default=None, help="parallel runs (default: cores)")
@click.option("--figures/--no-figures", default=True)
@click.option("--backend", default=None)
def sweep(instance_path: str, template: str, param: str, values: str,
          absolute: bool, objectives: str, fixed: str | None, outdir: str,
          jobs: int | None, figures: bool, backend: str | None):
    """Parameter sweep; writes the metric CSV, the per-group case-mix CSV,
    a JSON report, and (by default) the companion figures."""
    import os
    backend = resolve_backend(backend)
    instance = _load_instance(instance_path)
    spec = SweepSpec(template=template, param=param,
                     values=tuple(_parse_values(values)),
                     pct=not absolute,
                     objectives=tuple(o.strip() for o in objectives.split(",")),
                     fixed_params=json.loads(fixed) if fixed else {})
    report = run_sweep(instance, spec,
                       backend=backend,
                       jobs=jobs or os.cpu_count() or 1)
    outp = Path(outdir)
    outp.mkdir(parents=True, exist_ok=True)
    stem = f"{template}_{param.replace(',', '_')}"
    cio.write_sweep_csv(report, outp / f"{stem}.csv")
    cio.write_case_mix_csv(report, outp / f"{stem}_case_mix.csv")
    cio.write_result(report, outp / f"{stem}.json", format="json")
    written = [f"{stem}.csv", f"{stem}_case_mix.csv", f"{stem}.json"]
    if figures:
        for p in render_sweep_figures(report, outp, stem):
            written.append(p.name)
    _log(f"wrote {', '.join(written)} in {outp}")
    failed = [r for r in report.rows if r.status != "optimal"]
    if failed:
        _log(f"{len(failed)} run(s) failed")
        sys.exit(EXIT_INFEASIBLE)


@cli.command()
@click.argument("instance_path")
@click.argument("caseload_path")
@click.option("--backend", default=None)
@click.option("--out", default=None)
def pareto(instance_path: str, caseload_path: str, backend: str | None,
           out: str | None):
    """Audit a caseload for Pareto optimality and report the repair gap."""
    instance = _load_instance(instance_path)
    with open(caseload_path, encoding="utf-8") as f:
        payload = json.load(f)
    if "caseload" in payload:  # accept a full solve result
        payload = payload["caseload"]
    base = Caseload.from_dict(payload)
    audit = check_pareto(instance, base, backend=resolve_backend(backend))
    _emit(_round(audit.to_dict()), out)


@cli.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--instance", "instance_path", default="bundled")
@click.option("--session-store", default=None,
              help="JSON file for persisting session state across restarts")
def serve(port: int, host: str, instance_path: str, session_store: str | None):
    """Start the HTTP planning service."""
    import uvicorn

    from .api import create_app
    app = create_app(_load_instance(instance_path), session_store=session_store)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except _VALIDATION_ERRORS as exc:
        _log(f"error: {exc}")
        sys.exit(EXIT_USAGE)
    except FileNotFoundError as exc:
        _log(f"error: {exc}")
        sys.exit(EXIT_USAGE)
    except SystemExit:
        raise
    except SolverError as exc:
        _log(f"solver error: {exc}")
        sys.exit(EXIT_INTERNAL)
    except Exception as exc:  # pragma: no cover - last resort
        _log(f"internal error: {exc}")
        sys.exit(EXIT_INTERNAL)


if __name__ == "__main__":
    main()
