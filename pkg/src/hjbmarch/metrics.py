"""Error norms, sweep records, and the timing harness.

Errors are reported on a recorded time slice, by default t = 0. L1 is the
node-average absolute error (one normalization choice among several the
literature leaves open; only relative comparisons between schemes matter
here, and one fixed choice keeps every figure self-consistent). Data nodes
carry exact values and are included; that dilutes all schemes equally.
"""

import csv
import statistics
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ErrorReport:
    l1: float
    linf: float
    nodes_compared: int
    slice_time: float


def _report(diff, slice_time):
    diff = np.abs(np.asarray(diff, dtype=np.float64))
    return ErrorReport(
        l1=float(diff.mean()),
        linf=float(diff.max()),
        nodes_compared=int(diff.size),
        slice_time=float(slice_time),
    )


def error_vs_analytic(field, problem, t):
    """Node-mean and max absolute error against the problem's exact solution."""
    if problem.analytic is None:
        raise ValueError(f"{problem.name} has no exact solution evaluator")
    meshes = field.grid.meshes()
    exact = np.broadcast_to(problem.analytic(*meshes, t), field.grid.shape)
    return _report(field.values - exact, t)


def error_vs_reference(field, reference_field, stride, slice_time=0.0):
    """Error against a finer nested reference, over coinciding nodes only."""
    stride = int(stride)
    coarse_cells = field.grid.points_per_axis - 1
    fine_cells = reference_field.grid.points_per_axis - 1
    if stride < 1 or coarse_cells * stride != fine_cells:
        raise ValueError(
            f"grids are not nested: {coarse_cells} cells vs {fine_cells} at stride {stride}"
        )
    if field.grid.dim == 2:
        ref = reference_field.values[::stride, ::stride]
    else:
        ref = reference_field.values[::stride]
    return _report(field.values - ref, slice_time)


def convergence_slope(records):
    """Least-squares slope of log(error) vs log(h).

    Accepts SweepRecords (resolution and error.l1 are used) or plain
    (h, error) pairs; needs at least 3 points at distinct h.
    """
    pts = []
    for rec in records:
        if hasattr(rec, "resolution"):
            pts.append((1.0 / rec.resolution, rec.error.l1))
        else:
            h, err = rec
            pts.append((float(h), float(err)))
    if len({h for h, _ in pts}) < 3:
        raise ValueError("need at least 3 distinct spacings for a slope fit")
    logs = np.log(np.asarray(pts, dtype=np.float64))
    slope, _ = np.polyfit(logs[:, 0], logs[:, 1], 1)
    return float(slope)


@dataclass(frozen=True)
class SweepRecord:
    """One cell of an accuracy-vs-cost sweep."""

    scheme: str
    resolution: int
    k: float
    r: float
    wall_ms: float
    updates: int
    error: ErrorReport


SWEEP_HEADER = ("scheme", "resolution", "k", "r", "wall_ms", "updates", "l1", "linf")


def write_sweep_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for rec in records:
            writer.writerow(
                [
                    rec.scheme,
                    rec.resolution,
                    repr(float(rec.k)),
                    repr(float(rec.r)),
                    f"{rec.wall_ms:.3f}",
                    rec.updates,
                    repr(float(rec.error.l1)),
                    repr(float(rec.error.linf)),
                ]
            )


def timed_march(march_fn, repeats=3):
    """Run a zero-argument march callable `repeats` times; report the median
    wall time in ms alongside the last result. Identical inputs give
    identical outputs, so only the last result is kept.

    Works with both result shapes: the 2D march keeps its timing on
    result.report.wall_seconds, the 1D march directly on result.wall_seconds.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    walls = []
    result = None
    for _ in range(repeats):
        result = march_fn()
        report = getattr(result, "report", result)
        walls.append(report.wall_seconds * 1000.0)
    return result, float(statistics.median(walls))
