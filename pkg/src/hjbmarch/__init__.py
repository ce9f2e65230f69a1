"""Backward time-marching solvers for isotropic Hamilton-Jacobi-Bellman
problems on the unit square, plus a 1D advection testbed.

Three schemes share one driver: an explicit march that is monotone up to a
CFL step bound, an implicit march that solves each time slice as a static
boundary-value problem by fast marching and is stable for any step, and a
hybrid that applies the explicit update wherever a node-local CFL test
passes and fast-marches the rest.
"""

from .advect1d import SCHEMES_1D, March1DResult, cfl_step_1d, march_1d
from .geometry import Field, GridSpec, TimeSpec, make_grid
from .marchers import (
    SCHEMES_2D,
    MarchConfig,
    MarchResult,
    cfl_step_2d,
    ground_truth,
    make_config,
    march,
)
from .metrics import (
    ErrorReport,
    SweepRecord,
    convergence_slope,
    error_vs_analytic,
    error_vs_reference,
)
from .problems import (
    ADVECTION_CASE_IDS,
    Advection1DProblem,
    IsotropicProblem,
    advection_catalog,
    build_problem,
    experiment1,
    experiment2,
    experiment3,
    experiment4,
)
from .selftest import run_selftest

__version__ = "0.1.0"

__all__ = [
    "ADVECTION_CASE_IDS",
    "Advection1DProblem",
    "ErrorReport",
    "Field",
    "GridSpec",
    "IsotropicProblem",
    "March1DResult",
    "MarchConfig",
    "MarchResult",
    "SCHEMES_1D",
    "SCHEMES_2D",
    "SweepRecord",
    "TimeSpec",
    "advection_catalog",
    "build_problem",
    "cfl_step_1d",
    "cfl_step_2d",
    "convergence_slope",
    "error_vs_analytic",
    "error_vs_reference",
    "experiment1",
    "experiment2",
    "experiment3",
    "experiment4",
    "ground_truth",
    "make_config",
    "make_grid",
    "march",
    "march_1d",
    "run_selftest",
]
