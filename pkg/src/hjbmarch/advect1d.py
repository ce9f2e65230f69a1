"""Four forward-marching schemes for 1D advection with positive speed.

The PDE is v_t + f(x,t) v_x = g(x,t) on (0,1) with inflow data at x = 0;
f > 0 means information flows left to right, so x = 1 needs no condition and
the implicit update can be resolved in one left-to-right sweep.

The hybrid scheme reuses the explicit update array and the implicit sweep
kernel verbatim, so its two degenerate regimes (every node passes the CFL
test / no node does) reproduce the pure schemes bitwise.
"""

import math
import time as _time
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import Field, TimeSpec, make_grid

CFL_WARN_SLACK = 1.0 + 1e-12  # ignore pure round-off when warning about lambda > 1


def courant_numbers(speed_values, k, h):
    """Per-node Courant numbers (k/h)*f. Broadcasts."""
    return (k / h) * np.asarray(speed_values, dtype=np.float64)


def cfl_step_1d(problem, h):
    """Largest explicit-stable step h / max f, from the stored speed bound."""
    return h / problem.speed_max


def _explicit_values(v0, lam, kg):
    """Explicit update at every interior node; index 0 is left untouched."""
    out = v0.copy()
    out[1:] = lam[1:] * v0[:-1] + (1.0 - lam[1:]) * v0[1:] + kg[1:]
    return out


@njit(cache=True)
def _implicit_sweep(out, v0, lam, kg, skip):
    """Left-to-right resolution of the implicit update, in place.

    Nodes with skip set keep whatever out already holds (the boundary value
    at index 0, explicit first-pass values in the hybrid scheme).
    """
    for i in range(1, out.size):
        if skip[i]:
            continue
        li = lam[i]
        out[i] = (v0[i] + li * out[i - 1] + kg[i]) / (1.0 + li)


def _coeffs(problem, x, t, k):
    lam = courant_numbers(problem.speed(x, t), k, x[1] - x[0])
    lam = np.broadcast_to(lam, x.shape).astype(np.float64)
    if problem.source is None:
        kg = np.zeros_like(x)
    else:
        kg = k * np.broadcast_to(problem.source(x, t), x.shape).astype(np.float64)
    return lam, kg


def step_explicit_1d(v_n, problem, h, k, t_n):
    """One explicit step from t_n; warns (once) if any Courant number > 1."""
    x = v_n.grid.axis_coords()
    lam, kg = _coeffs(problem, x, t_n, k)
    if lam.max() > CFL_WARN_SLACK:
        warnings.warn(
            f"explicit step violates CFL: max Courant number {lam.max():.3g} > 1",
            stacklevel=2,
        )
    out = _explicit_values(v_n.values, lam, kg)
    out[0] = problem.inflow(t_n + k)
    return Field(v_n.grid, out)


def step_implicit_1d(v_n, problem, h, k, t_next):
    """One implicit step; coefficients and data read at the new time t_next."""
    x = v_n.grid.axis_coords()
    lam, kg = _coeffs(problem, x, t_next, k)
    out = v_n.values.copy()
    out[0] = problem.inflow(t_next)
    _implicit_sweep(out, v_n.values, lam, kg, np.zeros(x.size, dtype=np.bool_))
    return Field(v_n.grid, out)


def step_hybrid_1d(v_n, problem, h, k, t_n, speed_threshold=None):
    """Two-pass step: explicit where the node-local CFL test passes, implicit
    sweep over the rest.

    The test admits node i when f(x_i, t_n) <= speed_threshold, which defaults
    to h/k (the same comparison as the Courant number lambda_i <= 1). Callers
    that chose k = r * (h/F) should pass F/r so the comparison is exact at the
    degenerate endpoints.
    """
    if speed_threshold is None:
        speed_threshold = h / k
    x = v_n.grid.axis_coords()
    f_now = np.broadcast_to(problem.speed(x, t_n), x.shape).astype(np.float64)
    explicit_mask = f_now <= speed_threshold
    lam_n, kg_n = _coeffs(problem, x, t_n, k)

    out = v_n.values.copy()
    if explicit_mask.any():
        exp_vals = _explicit_values(v_n.values, lam_n, kg_n)
        out = np.where(explicit_mask, exp_vals, out)
    out[0] = problem.inflow(t_n + k)

    skip = explicit_mask.copy()
    skip[0] = True
    if not skip.all():
        lam_next, kg_next = _coeffs(problem, x, t_n + k, k)
        _implicit_sweep(out, v_n.values, lam_next, kg_next, skip)
    return Field(v_n.grid, out)


def step_semilagrangian_1d(v_n, problem, h, k, t_next):
    """Trace each node one step back along its characteristic and interpolate.

    The characteristic foot is x - k*f(x, t_next). Feet inside the domain use
    linear interpolation of the old slice; feet past the inflow boundary use
    the boundary data at the straight-line crossing time t_next - x/f (clamped
    at 0). The one-step source weight k*g is kept in both branches.
    """
    x = v_n.grid.axis_coords()
    v0 = v_n.values
    f_next = np.broadcast_to(problem.speed(x, t_next), x.shape).astype(np.float64)
    feet = x - k * f_next

    inside = feet >= 0.0
    clipped = np.clip(feet, 0.0, 1.0)
    j = np.minimum((clipped / h).astype(np.int64), x.size - 2)
    xi = clipped / h - j
    interp = (1.0 - xi) * v0[j] + xi * v0[j + 1]

    crossing = np.maximum(t_next - x / f_next, 0.0)
    out = np.where(inside, interp, problem.inflow(crossing))
    if problem.source is not None:
        out = out + k * np.broadcast_to(problem.source(x, t_next), x.shape)
    out[0] = problem.inflow(t_next)
    return Field(v_n.grid, out)


SCHEMES_1D = ("explicit", "implicit", "hybrid", "semilagrangian")


@dataclass
class March1DResult:
    """Everything a sweep harness needs from one 1D run."""

    problem_name: str
    scheme: str
    grid: object
    time: TimeSpec
    r: float
    final: Field
    recorded: dict
    updates: int
    wall_seconds: float = 0.0


def march_1d(problem, points, scheme, r=None, k=None, record_indices=()):
    """March a 1D problem from t = 0 to t = terminal_time.

    Exactly one of r (step multiplier, k = r * CFL step) and k (requested
    step) must be given. The step is shrunk so an integer number of steps
    lands exactly on the terminal time. Returns a March1DResult whose
    `recorded` maps requested step indices to Fields; the final slice is
    always kept.
    """
    if scheme not in SCHEMES_1D:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES_1D}")
    if (r is None) == (k is None):
        raise ValueError("give exactly one of r and k")

    grid = make_grid(1, points)
    h = grid.h
    k_hat = cfl_step_1d(problem, h)
    threshold = None
    if k is None:
        k = r * k_hat
        if scheme == "hybrid":
            threshold = problem.speed_max / r
    else:
        r = k / k_hat
    T = problem.terminal_time
    num_steps = max(1, math.ceil(T / k - 1e-9))
    time = TimeSpec(terminal_time=T, num_steps=num_steps)
    k = time.k

    x = grid.axis_coords()
    v = Field(grid, np.asarray(problem.initial(x), dtype=np.float64).copy())
    v.values[0] = problem.inflow(0.0)

    recorded = {}
    if 0 in record_indices:
        recorded[0] = v.copy()
    updates = 0
    start = _time.perf_counter()
    for n in range(num_steps):
        t_n = time.t(n)
        if scheme == "explicit":
            v = step_explicit_1d(v, problem, h, k, t_n)
        elif scheme == "implicit":
            v = step_implicit_1d(v, problem, h, k, t_n + k)
        elif scheme == "hybrid":
            v = step_hybrid_1d(v, problem, h, k, t_n, speed_threshold=threshold)
        else:
            v = step_semilagrangian_1d(v, problem, h, k, t_n + k)
        updates += points - 1
        if not np.isfinite(v.values).all():
            raise FloatingPointError(
                f"non-finite values after step {n} of {problem.name}"
            )
        if n + 1 in record_indices:
            recorded[n + 1] = v.copy()
    wall = _time.perf_counter() - start

    return March1DResult(
        problem_name=problem.name,
        scheme=scheme,
        grid=grid,
        time=time,
        r=r,
        final=v,
        recorded=recorded,
        updates=updates,
        wall_seconds=wall,
    )
