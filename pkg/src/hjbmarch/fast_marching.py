"""Fast-marching solver for one implicit time slice.

The implicit backward step couples every node of a slice through the upwind
gradient at the new time level. Rewriting the step as a static Eikonal
problem with the value-dependent speed s/(P - V), where P = W0 + k*K is the
stay-in-place value and s = k*f, lets a Dijkstra-like sweep solve the whole
slice in one pass: nodes are locked in ascending value order, each non-fixed
node starts at its cap P, and locking a node can only lower its not-yet
locked neighbors through the one-sided/two-sided local solves.

Every node is seeded into the heap at initialization (fixed nodes at their
data values, the rest at their caps), so a node whose cap already beats any
wave reaching it still propagates to its neighbors. Without that, interior
nodes whose later-slice values dip below the incoming fronts would never act
as sources and the result would disagree with the coupled system's fixed
point on non-monotone data.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .geometry import Field
from .local_updates import one_sided_kernel, two_sided_kernel

# Node labels. The solver seeds everything as CONSIDERED up front, so FAR
# only describes the conceptual pre-seeding state; it never coexists with a
# live heap here.
FAR = 0
CONSIDERED = 1
ACCEPTED = 2


@njit(cache=True)
def _less(keys, a, b):
    """Heap order: by key, ties by ascending flat index (deterministic)."""
    ka = keys[a]
    kb = keys[b]
    return ka < kb or (ka == kb and a < b)


@njit(cache=True)
def _sift_up(heap, pos, keys, i):
    node = heap[i]
    while i > 0:
        parent = (i - 1) >> 1
        if _less(keys, node, heap[parent]):
            heap[i] = heap[parent]
            pos[heap[i]] = i
            i = parent
        else:
            break
    heap[i] = node
    pos[node] = i


@njit(cache=True)
def _sift_down(heap, pos, keys, size, i):
    node = heap[i]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and _less(keys, heap[child + 1], heap[child]):
            child += 1
        if _less(keys, heap[child], node):
            heap[i] = heap[child]
            pos[heap[i]] = i
            i = child
        else:
            break
    heap[i] = node
    pos[node] = i


@njit(cache=True)
def _pop_min(heap, pos, keys, size):
    node = heap[0]
    pos[node] = -1
    size -= 1
    if size > 0:
        moved = heap[size]
        heap[0] = moved
        pos[moved] = 0
        _sift_down(heap, pos, keys, size, 0)
    return node, size


class ConsideredHeap:
    """Binary min-heap of (value, node) with decrease-key, one entry per node.

    Keys compare by value, ties broken by ascending node index. Backed by the
    same compiled sift routines the slice kernel uses.
    """

    def __init__(self, num_nodes):
        self.keys = np.full(num_nodes, np.inf)
        self.heap = np.empty(num_nodes, dtype=np.int64)
        self.pos = np.full(num_nodes, -1, dtype=np.int64)
        self.size = 0

    def __len__(self):
        return self.size

    def __contains__(self, node):
        return self.pos[node] >= 0

    def push(self, node, key):
        if self.pos[node] >= 0:
            raise ValueError(f"node {node} already on the heap")
        self.keys[node] = key
        self.heap[self.size] = node
        self.pos[node] = self.size
        self.size += 1
        _sift_up(self.heap, self.pos, self.keys, self.size - 1)

    def decrease(self, node, key):
        if self.pos[node] < 0:
            raise ValueError(f"node {node} is not on the heap")
        if key > self.keys[node]:
            raise ValueError(f"decrease-key would raise {self.keys[node]} to {key}")
        self.keys[node] = key
        _sift_up(self.heap, self.pos, self.keys, self.pos[node])

    def pop_min(self):
        if self.size == 0:
            raise IndexError("pop from empty heap")
        node, self.size = _pop_min(self.heap, self.pos, self.keys, self.size)
        return int(node), float(self.keys[node])


@njit(cache=True)
def fmm_slice_kernel(vflat, pflat, sflat, qflat, m, h):
    """Lock all nodes of one slice in ascending value order, in place.

    vflat holds the initial values (fixed data on q nodes, caps elsewhere)
    and is overwritten with the solved slice. pflat and sflat hold the cap
    P = W0 + k*K and the step reach s = k*f per node. Returns (pops, solves,
    monotone): pops is the number of nodes locked, solves the number of
    local-solve evaluations, monotone whether locked values never decreased.
    """
    n = vflat.size
    heap = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    accepted = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        heap[i] = i
        pos[i] = i
    size = n
    for i in range(n // 2 - 1, -1, -1):
        _sift_down(heap, pos, vflat, size, i)

    pops = 0
    solves = 0
    monotone = True
    last = -np.inf
    while size > 0:
        node, size = _pop_min(heap, pos, vflat, size)
        vpop = vflat[node]
        accepted[node] = True
        pops += 1
        if vpop < last:
            monotone = False
        last = vpop

        i = node // m
        j = node % m
        for d in range(4):
            if d == 0:
                ni, nj = i - 1, j
            elif d == 1:
                ni, nj = i + 1, j
            elif d == 2:
                ni, nj = i, j - 1
            else:
                ni, nj = i, j + 1
            if ni < 0 or ni >= m or nj < 0 or nj >= m:
                continue
            nb = ni * m + nj
            if accepted[nb] or qflat[nb]:
                continue
            if not vpop < vflat[nb]:
                continue
            p = pflat[nb]
            s = sflat[nb]
            # Transverse axis: perpendicular to the pop->neighbor direction.
            if d < 2:
                ta = nb - 1 if nj > 0 else -1
                tb = nb + 1 if nj < m - 1 else -1
            else:
                ta = nb - m if ni > 0 else -1
                tb = nb + m if ni < m - 1 else -1
            w2 = np.inf
            have_w2 = False
            if ta >= 0 and accepted[ta]:
                w2 = vflat[ta]
                have_w2 = True
            if tb >= 0 and accepted[tb]:
                if not have_w2 or vflat[tb] < w2:
                    w2 = vflat[tb]
                have_w2 = True
            if have_w2:
                trial = two_sided_kernel(p, vpop, w2, h, s)
                if trial == np.inf:
                    trial = one_sided_kernel(p, vpop, h, s)
            else:
                trial = one_sided_kernel(p, vpop, h, s)
            solves += 1
            if trial < vflat[nb]:
                vflat[nb] = trial
                _sift_up(heap, pos, vflat, pos[nb])
    return pops, solves, monotone


def solve_slice_arrays(v_next_values, q_mask, q_values, fmap, kmap, h, k):
    """Array-level slice solve; the marchers' hot path.

    Returns (values, pops, solves). Raises if the fixed set is empty or
    carries non-finite values, or if the locking order ever regressed.
    """
    q_mask = np.asarray(q_mask, dtype=bool)
    if not q_mask.any():
        raise ValueError("the fixed set is empty; the slice has no data source")
    fixed = np.asarray(q_values, dtype=np.float64)[q_mask]
    if not np.isfinite(fixed).all():
        raise ValueError("non-finite values in the fixed set")

    caps = v_next_values + k * np.broadcast_to(kmap, v_next_values.shape)
    v = np.where(q_mask, q_values, caps).astype(np.float64)
    pflat = np.ascontiguousarray(caps, dtype=np.float64).reshape(-1)
    sflat = (k * np.broadcast_to(fmap, v_next_values.shape)).astype(np.float64).reshape(-1)
    vflat = np.ascontiguousarray(v).reshape(-1)
    m = v_next_values.shape[0]
    pops, solves, monotone = fmm_slice_kernel(
        vflat, pflat, sflat, q_mask.reshape(-1), m, h
    )
    if not monotone:
        raise RuntimeError("locked values regressed; slice solve is not causal")
    return vflat.reshape(v_next_values.shape), int(pops), int(solves)


@dataclass(frozen=True)
class SliceInputs:
    """One implicit slice problem: known later slice, fixed set, coefficients.

    q_mask marks fixed nodes (boundary data plus any values pinned by a
    hybrid explicit pass); q_values supplies their values and is read only
    where q_mask is set. Speed and cost come either from precomputed arrays
    fmap/kmap or, when those are None, from problem evaluated at t_n.
    """

    v_next: Field
    q_mask: np.ndarray
    q_values: np.ndarray
    k: float
    t_n: float
    problem: Optional[object] = None
    fmap: Optional[np.ndarray] = None
    kmap: Optional[np.ndarray] = None


def slice_coefficient_maps(inputs):
    """Speed and cost arrays for a slice, from inputs.fmap/kmap or the problem."""
    grid = inputs.v_next.grid
    fmap, kmap = inputs.fmap, inputs.kmap
    if fmap is None or kmap is None:
        if inputs.problem is None:
            raise ValueError("need either fmap/kmap arrays or a problem")
        X, Y = grid.meshes()
        if fmap is None:
            fmap = np.broadcast_to(inputs.problem.speed(X, Y, inputs.t_n), grid.shape)
        if kmap is None:
            kmap = np.broadcast_to(
                inputs.problem.running_cost(X, Y, inputs.t_n), grid.shape
            )
    return fmap, kmap


def solve_slice(inputs):
    """Solve one implicit slice; returns the new Field."""
    grid = inputs.v_next.grid
    fmap, kmap = slice_coefficient_maps(inputs)
    values, _, _ = solve_slice_arrays(
        inputs.v_next.values,
        inputs.q_mask,
        inputs.q_values,
        fmap,
        kmap,
        grid.h,
        inputs.k,
    )
    return Field(grid, values)
