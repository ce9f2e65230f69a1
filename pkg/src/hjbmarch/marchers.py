"""Backward time-marching drivers for the 2D problems.

All three schemes share one loop: start from the terminal data at t = T and
walk time slices down to t = 0. Per slice, the explicit scheme updates every
non-data node from the later slice; the implicit scheme fixes the data nodes
and hands the rest to the fast-marching slice solver; the hybrid scheme
first updates explicitly wherever the node-local CFL test passes, pins those
values alongside the data nodes, and fast-marches the remainder. With the
test passing everywhere the hybrid collapses to the explicit scheme, with it
failing everywhere to the implicit one, bitwise in both cases.
"""

import csv
import math
import os
import time as _time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fast_marching import solve_slice_arrays
from .geometry import Field, GridSpec, TimeSpec, make_grid
from .local_updates import explicit_slice

SCHEMES_2D = ("explicit", "implicit", "hybrid")

SQRT2 = math.sqrt(2.0)


def cfl_step_2d(problem, h):
    """Largest step with a monotone explicit update: h / (sqrt(2) * max f)."""
    return h / (SQRT2 * problem.speed_bounds[1])


@dataclass(frozen=True)
class MarchConfig:
    """One march: scheme, discretization, and which slices to keep.

    record_slices holds time indices n (0 = the t = 0 slice, always worth
    keeping; num_steps = the terminal slice). r is the step multiplier the
    step was derived from, when it was; the hybrid scheme uses it to evaluate
    its per-node CFL threshold max-f/r exactly.
    """

    scheme: str
    grid: GridSpec
    time: TimeSpec
    record_slices: frozenset = frozenset({0})
    r: float = None

    def __post_init__(self):
        if self.scheme not in SCHEMES_2D:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES_2D}")
        bad = [n for n in self.record_slices if not 0 <= n <= self.time.num_steps]
        if bad:
            raise ValueError(f"recorded slice indices {bad} outside [0, {self.time.num_steps}]")


def make_config(problem, resolution, scheme, r=None, k=None, record_indices=(0,)):
    """Build a MarchConfig on a resolution-cell grid of the unit square.

    Exactly one of r (step multiplier, k = r * CFL step) and k must be given;
    the step is then shrunk so an integer number of steps spans [0, T].
    """
    if (r is None) == (k is None):
        raise ValueError("give exactly one of r and k")
    grid = make_grid(2, resolution + 1)
    k_hat = cfl_step_2d(problem, grid.h)
    if k is None:
        k = r * k_hat
    else:
        r = k / k_hat
    T = problem.terminal_time
    num_steps = max(1, math.ceil(T / k - 1e-9))
    return MarchConfig(
        scheme=scheme,
        grid=grid,
        time=TimeSpec(terminal_time=T, num_steps=num_steps),
        record_slices=frozenset(record_indices),
        r=r,
    )


@dataclass
class RunReport:
    """Cost accounting for one march.

    updates counts values computed by the scheme (non-data nodes, summed over
    slices); solves counts local-solve evaluations inside the slice solver
    (0 for the explicit scheme) as a finer-grained diagnostic.
    """

    scheme: str
    num_steps: int
    k: float
    updates: int = 0
    solves: int = 0
    wall_seconds: float = 0.0
    updates_per_slice: list = field(default_factory=list)


@dataclass
class MarchResult:
    problem_name: str
    config: MarchConfig
    recorded: dict
    report: RunReport

    @property
    def final(self):
        return self.recorded[0]


def march(problem, config):
    """Run one backward march; returns recorded slices plus a RunReport."""
    grid, tspec = config.grid, config.time
    h, k, N = grid.h, tspec.k, tspec.num_steps
    scheme = config.scheme

    if scheme == "explicit":
        k_hat = cfl_step_2d(problem, h)
        if k > k_hat * (1.0 + 1e-12):
            warnings.warn(
                f"explicit march with k = {k:.3g} above the monotone bound {k_hat:.3g}",
                stacklevel=2,
            )

    X, Y = grid.meshes()
    dmask = problem.make_mask(grid).is_dirichlet()
    n_data = int(dmask.sum())
    per_slice = grid.num_nodes - n_data

    split = problem.speed_split
    spatial = split[2](X, Y) if split is not None else None

    def speed_at(t):
        if split is not None:
            return split[0](t) + split[1](t) * spatial
        return np.broadcast_to(problem.speed(X, Y, t), grid.shape)

    def cost_at(t):
        return np.broadcast_to(problem.running_cost(X, Y, t), grid.shape)

    def data_at(t):
        return np.broadcast_to(problem.dirichlet(X, Y, t), grid.shape)

    if scheme == "hybrid":
        if config.r is not None:
            threshold = problem.speed_bounds[1] / config.r
        else:
            threshold = h / (k * SQRT2)

    report = RunReport(scheme=scheme, num_steps=N, k=k)
    v = np.broadcast_to(problem.terminal(X, Y), grid.shape).astype(np.float64).copy()
    recorded = {}
    if N in config.record_slices:
        recorded[N] = Field(grid, v.copy())

    start = _time.perf_counter()
    for n in range(N - 1, -1, -1):
        t_n = tspec.t(n)
        fmap = speed_at(t_n)
        kmap = cost_at(t_n)
        qvals = data_at(t_n)

        if scheme == "explicit":
            vnew = explicit_slice(v, fmap, kmap, h, k)
            vnew[dmask] = qvals[dmask]
        elif scheme == "implicit":
            vnew, _, solves = solve_slice_arrays(v, dmask, qvals, fmap, kmap, h, k)
            report.solves += solves
        else:
            emask = ~dmask & (fmap <= threshold)
            if emask.any():
                evals = explicit_slice(v, fmap, kmap, h, k)
                pinned = np.where(dmask, qvals, evals)
            else:
                pinned = qvals
            q_mask = dmask | emask
            if q_mask.all():
                vnew = pinned.astype(np.float64).copy()
            else:
                vnew, _, solves = solve_slice_arrays(
                    v, q_mask, pinned, fmap, kmap, h, k
                )
                report.solves += solves

        if not np.isfinite(vnew).all():
            raise FloatingPointError(
                f"non-finite values in slice {n} of {problem.name} ({scheme})"
            )
        v = vnew
        report.updates += per_slice
        report.updates_per_slice.append(per_slice)
        if n in config.record_slices:
            recorded[n] = Field(grid, v.copy())
    report.wall_seconds = _time.perf_counter() - start

    return MarchResult(
        problem_name=problem.name, config=config, recorded=recorded, report=report
    )


def cache_dir():
    """Ground-truth cache directory; HJBMARCH_CACHE overrides the default."""
    override = os.environ.get("HJBMARCH_CACHE")
    if override:
        return override
    return os.path.join(os.path.expanduser("~"), ".cache", "hjbmarch")


GT_HEADER = "hjbmarch-gt v1"


def ground_truth(problem, fine_resolution, refresh=False):
    """Fine-grid explicit reference for a problem without an exact solution.

    Runs the explicit scheme at the CFL step on a fine_resolution-cell grid
    and caches the t = 0 slice under the problem name. A cached file that
    fails validation is silently recomputed. Returns the t = 0 Field.
    """
    if problem.analytic is not None:
        raise ValueError(
            f"{problem.name} has an exact solution; compare against that instead"
        )
    grid = make_grid(2, fine_resolution + 1)
    path = os.path.join(cache_dir(), f"{problem.name}-{fine_resolution}.csv")
    if not refresh:
        cached = _read_truth(path, problem.name, fine_resolution, grid)
        if cached is not None:
            return cached

    result = march(problem, make_config(problem, fine_resolution, "explicit", r=1.0))
    final = result.final
    os.makedirs(cache_dir(), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(f"{GT_HEADER} {problem.name} {fine_resolution}\n")
        for row in final.values:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    os.replace(tmp, path)
    return final


def _read_truth(path, name, resolution, grid):
    try:
        with open(path, newline="") as fh:
            header = fh.readline().strip()
            if header != f"{GT_HEADER} {name} {resolution}":
                return None
            rows = [[float(c) for c in row] for row in csv.reader(fh) if row]
        vals = np.asarray(rows, dtype=np.float64)
        if vals.size != grid.num_nodes or not np.isfinite(vals).all():
            return None
        return Field(grid, vals.reshape(grid.shape))
    except (OSError, ValueError):
        return None
