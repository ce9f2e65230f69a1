"""Reference solvers used to cross-check the production code.

Two independent oracles: a Gauss-Seidel iteration that solves the coupled
implicit slice system directly (no heap, no acceptance order), and a scalar
bisection that solves the local quadratic equations with no algebra beyond
evaluating the residual. Both ship in the library so the selftest subcommand
can run them anywhere, but nothing in the production path depends on them.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .fast_marching import slice_coefficient_maps
from .geometry import Field
from .local_updates import one_sided_kernel, two_sided_kernel


@dataclass(frozen=True)
class OracleResult:
    field: Field
    iterations: int
    converged: bool
    max_change: float


@njit(cache=True)
def _node_best(v, i, j, m, p, s, h):
    """Minimum over the cap and every admissible local solve at one node."""
    wl = v[i - 1, j] if i > 0 else np.inf
    wr = v[i + 1, j] if i < m - 1 else np.inf
    wd = v[i, j - 1] if j > 0 else np.inf
    wu = v[i, j + 1] if j < m - 1 else np.inf
    best = p
    for w in (wl, wr, wd, wu):
        if np.isfinite(w):
            cand = one_sided_kernel(p, w, h, s)
            if cand < best:
                best = cand
    for wx in (wl, wr):
        if not np.isfinite(wx):
            continue
        for wy in (wd, wu):
            if not np.isfinite(wy):
                continue
            cand = two_sided_kernel(p, wx, wy, h, s)
            if cand < best:
                best = cand
    return best


@njit(cache=True)
def _gs_sweeps(v, pmap, smap, qmask, h, tol, max_iters, first_ordering):
    """Alternate the four geometric sweep orderings until stationary."""
    m = v.shape[0]
    fwd = np.arange(m)
    bwd = fwd[::-1].copy()
    iterations = 0
    max_change = np.inf
    while iterations < max_iters:
        ordering = (iterations + first_ordering) % 4
        ii = fwd if ordering < 2 else bwd
        jj = fwd if ordering % 2 == 0 else bwd
        max_change = 0.0
        for a in range(m):
            i = ii[a]
            for b in range(m):
                j = jj[b]
                if qmask[i, j]:
                    continue
                new = _node_best(v, i, j, m, pmap[i, j], smap[i, j], h)
                change = abs(new - v[i, j])
                if change > max_change:
                    max_change = change
                v[i, j] = new
        iterations += 1
        if max_change < tol:
            return iterations, True, max_change
    return iterations, False, max_change


def gauss_seidel_slice(inputs, tol=1e-13, max_iters=2000, first_ordering=0):
    """Solve one implicit slice by sweeping to a fixed point.

    Non-fixed nodes start at their stay-in-place caps; each visit takes the
    minimum of the cap, the four one-neighbor solves, and the four quadrant
    solves, using current neighbor values. Intended for small grids; the
    production path is the fast-marching solver.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid = inputs.v_next.grid
    fmap, kmap = slice_coefficient_maps(inputs)
    q_mask = np.asarray(inputs.q_mask, dtype=bool)
    k = inputs.k

    caps = inputs.v_next.values + k * np.broadcast_to(kmap, grid.shape)
    v = np.where(q_mask, inputs.q_values, caps).astype(np.float64)
    if q_mask.all():
        return OracleResult(
            field=Field(grid, v), iterations=0, converged=True, max_change=0.0
        )

    pmap = np.ascontiguousarray(caps, dtype=np.float64)
    smap = (k * np.broadcast_to(fmap, grid.shape)).astype(np.float64)
    iterations, converged, max_change = _gs_sweeps(
        v, pmap, smap, q_mask, grid.h, tol, max_iters, first_ordering
    )
    return OracleResult(
        field=Field(grid, v),
        iterations=int(iterations),
        converged=bool(converged),
        max_change=float(max_change),
    )


def bisect_local(kind, inputs, tol=1e-12):
    """Solve a local quadratic by bisecting its residual; +inf if unsolvable.

    kind is "one" or "two". The residual
    ((V-w1)/h)^2 [+ ((V-w2)/h)^2] - ((P-V)/s)^2 is strictly increasing on the
    admissible interval [max(w1[, w2]), P], so there is at most one admissible
    root and plain bisection finds it to within tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    p, s, h = inputs.p, inputs.s, inputs.h
    if kind == "one":
        lo = inputs.w1

        def residual(v):
            return ((v - inputs.w1) / h) ** 2 - ((p - v) / s) ** 2

    elif kind == "two":
        if inputs.w2 is None:
            raise ValueError("two-sided bisection needs w2")
        lo = max(inputs.w1, inputs.w2)

        def residual(v):
            return (
                ((v - inputs.w1) / h) ** 2
                + ((v - inputs.w2) / h) ** 2
                - ((p - v) / s) ** 2
            )

    else:
        raise ValueError(f"kind must be 'one' or 'two', got {kind!r}")

    hi = p
    if not lo < hi:
        return math.inf
    r_lo = residual(lo)
    if r_lo == 0.0:
        return lo
    if r_lo > 0.0:
        return math.inf
    # residual(hi) >= 0 always (sum of squares), so the bracket is valid.
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
