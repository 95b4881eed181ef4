"""Case-mix planning engine.

Allocates hospital resource time (theatres, wards, intensive care) across
patient groups by maximizing utility-based achievement scalarizations,
with goal-attainment / goal-programming baselines, Pareto auditing and
repair, and parameter sensitivity sweeps.
"""

from .instance import (Activity, Caseload, HospitalInstance, InstanceError,
                       PatientGroup, Resource, Subtype, check_caseload)
from .model import CmpProgram, build_model, compute_upper_bounds, solve_throughput
from .utility import (CATALOG, NonlinearCurve, PiecewiseLinearUtility, UfSpec,
                      UtilityError, evaluate, instantiate, is_concave,
                      sample_nonlinear)
from .scalarize import (AsfConfig, GoalConfig, RepairStrategy, ScalarizeError,
                        SolveResult, repair, solve_asf, solve_gam, solve_gpm)
from .pareto import ParetoAudit, check_pareto
from .sensitivity import SweepReport, SweepSpec, case_mix_diff, run_sweep
from . import io

__version__ = "0.1.0"

__all__ = [
    "Activity", "Caseload", "HospitalInstance", "InstanceError",
    "PatientGroup", "Resource", "Subtype", "check_caseload",
    "CmpProgram", "build_model", "compute_upper_bounds", "solve_throughput",
    "CATALOG", "NonlinearCurve", "PiecewiseLinearUtility", "UfSpec",
    "UtilityError", "evaluate", "instantiate", "is_concave", "sample_nonlinear",
    "AsfConfig", "GoalConfig", "RepairStrategy", "ScalarizeError",
    "SolveResult", "repair", "solve_asf", "solve_gam", "solve_gpm",
    "ParetoAudit", "check_pareto",
    "SweepReport", "SweepSpec", "case_mix_diff", "run_sweep",
    "io", "__version__",
]
