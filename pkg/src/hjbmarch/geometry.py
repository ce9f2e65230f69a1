"""Uniform 1D/2D grids, time partitions, grid functions, and boundary masks.

Grids cover a closed box with gridpoints on the boundary. A "resolution" R
means R cells per axis, i.e. R+1 gridpoints and spacing h = (hi-lo)/R.
"""

import csv
from dataclasses import dataclass

import numpy as np

# Node classifications used by BoundaryMask.
INTERIOR = 0
DIRICHLET = 1
OUTFLOW = 2

EDGE_NAMES_1D = ("x0", "x1")
EDGE_NAMES_2D = ("x0", "x1", "y0", "y1")


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice on a box, shared by every field of a run.

    points_per_axis is the gridpoint count M per axis (M-1 cells), so
    h = (hi - lo)/(M - 1). Node (i, j) sits at (lo + i*h, lo + j*h); flat
    indexing is row-major, flat = i*M + j in 2D.
    """

    dim: int
    points_per_axis: int
    extents: tuple
    h: float

    @property
    def shape(self):
        return (self.points_per_axis,) * self.dim

    @property
    def num_nodes(self):
        return self.points_per_axis**self.dim

    def axis_coords(self, axis=0):
        lo, hi = self.extents[axis]
        return np.linspace(lo, hi, self.points_per_axis)

    def meshes(self):
        """Coordinate arrays for vectorized evaluation ((X,) in 1D, (X, Y) in 2D)."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def coord(self, node):
        node = _as_tuple(node, self.dim)
        return tuple(self.axis_coords(a)[node[a]] for a in range(self.dim))

    def flat_index(self, node):
        node = _as_tuple(node, self.dim)
        m = self.points_per_axis
        flat = 0
        for a in range(self.dim):
            if not 0 <= node[a] < m:
                raise IndexError(f"node {node} outside {self.shape} grid")
            flat = flat * m + node[a]
        return flat

    def unflat(self, flat):
        if not 0 <= flat < self.num_nodes:
            raise IndexError(f"flat index {flat} outside grid of {self.num_nodes} nodes")
        m = self.points_per_axis
        if self.dim == 1:
            return (flat,)
        return (flat // m, flat % m)


def make_grid(dim, points_per_axis, extents=(0.0, 1.0)):
    """Build a GridSpec.

    extents may be a single (lo, hi) pair applied to every axis, or a
    sequence of per-axis pairs. Rejects degenerate boxes and grids without
    interior nodes.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    m = int(points_per_axis)
    if m < 3:
        raise ValueError(f"need at least 3 points per axis, got {m}")
    ext = _normalize_extents(extents, dim)
    widths = {hi - lo for lo, hi in ext}
    if len(widths) != 1:
        raise ValueError("all axes must share one extent width on a uniform grid")
    lo0, hi0 = ext[0]
    if hi0 <= lo0:
        raise ValueError(f"degenerate extents {ext}")
    h = (hi0 - lo0) / (m - 1)
    return GridSpec(dim=dim, points_per_axis=m, extents=ext, h=h)


def _normalize_extents(extents, dim):
    ext = tuple(extents)
    if len(ext) == 2 and np.isscalar(ext[0]):
        ext = (tuple(map(float, ext)),) * dim
    else:
        ext = tuple(tuple(map(float, pair)) for pair in ext)
    if len(ext) != dim:
        raise ValueError(f"expected {dim} extent pairs, got {len(ext)}")
    for lo, hi in ext:
        if hi <= lo:
            raise ValueError(f"degenerate extents ({lo}, {hi})")
    return ext


def neighbors(grid, node):
    """Von-Neumann neighbors of a node.

    Returns a list of (axis, direction, neighbor) with direction in {-1, +1};
    neighbor is None for off-grid entries so callers can apply their own
    stencil-truncation rule.
    """
    node = _as_tuple(node, grid.dim)
    m = grid.points_per_axis
    out = []
    for axis in range(grid.dim):
        for direction in (-1, +1):
            idx = node[axis] + direction
            if 0 <= idx < m:
                nb = list(node)
                nb[axis] = idx
                out.append((axis, direction, tuple(nb)))
            else:
                out.append((axis, direction, None))
    return out


def _as_tuple(node, dim):
    if np.isscalar(node):
        node = (int(node),)
    node = tuple(int(c) for c in node)
    if len(node) != dim:
        raise ValueError(f"node {node} has wrong dimension for a {dim}D grid")
    return node


@dataclass
class Field:
    """One time slice of grid values.

    values has the grid's natural shape ((M,) or (M, M)); +inf is a legal
    sentinel for "no finite value". Row-major raveling realizes the
    documented flat mapping.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            if self.values.size == self.grid.num_nodes:
                self.values = self.values.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"values shape {self.values.shape} does not match grid {self.grid.shape}"
                )

    def copy(self):
        return Field(self.grid, self.values.copy())

    def flat(self):
        return self.values.reshape(-1)


def field_full(grid, fill):
    return Field(grid, np.full(grid.shape, float(fill)))


def field_from_function(grid, fn, t=None):
    """Sample fn on the grid; fn takes coordinate arrays (and t if given)."""
    meshes = grid.meshes()
    args = meshes if t is None else (*meshes, t)
    vals = np.broadcast_to(np.asarray(fn(*args), dtype=np.float64), grid.shape)
    return Field(grid, vals.copy())


@dataclass(frozen=True)
class BoundaryMask:
    """Per-node classification: INTERIOR, DIRICHLET, or OUTFLOW.

    Built from whole-edge assignments; corners shared by a Dirichlet edge and
    an outflow edge count as Dirichlet (boundary data wins).
    """

    grid: GridSpec
    kinds: np.ndarray

    def is_dirichlet(self):
        return self.kinds == DIRICHLET

    def is_outflow(self):
        return self.kinds == OUTFLOW

    def is_interior(self):
        return self.kinds == INTERIOR


def boundary_mask(grid, dirichlet_edges, outflow_edges=()):
    """Classify boundary nodes from per-edge assignments.

    Edges are named x0/x1 (1D and 2D) and y0/y1 (2D only); every edge must be
    assigned to exactly one class and together they must cover the whole
    topological boundary.
    """
    names = EDGE_NAMES_1D if grid.dim == 1 else EDGE_NAMES_2D
    d, o = frozenset(dirichlet_edges), frozenset(outflow_edges)
    unknown = (d | o) - set(names)
    if unknown:
        raise ValueError(f"unknown edge names {sorted(unknown)}; valid: {names}")
    if d & o:
        raise ValueError(f"edges assigned twice: {sorted(d & o)}")
    if (d | o) != set(names):
        missing = set(names) - (d | o)
        raise ValueError(f"unclassified boundary edges: {sorted(missing)}")

    kinds = np.full(grid.shape, INTERIOR, dtype=np.int8)

    def paint(edge, kind):
        if grid.dim == 1:
            sl = {"x0": (0,), "x1": (-1,)}[edge]
        else:
            sl = {
                "x0": (0, slice(None)),
                "x1": (-1, slice(None)),
                "y0": (slice(None), 0),
                "y1": (slice(None), -1),
            }[edge]
        kinds[sl] = kind

    # Outflow first so Dirichlet overwrites shared corners.
    for edge in o:
        paint(edge, OUTFLOW)
    for edge in d:
        paint(edge, DIRICHLET)
    return BoundaryMask(grid=grid, kinds=kinds)


def write_field_csv(field, path):
    """Serialize a field: one CSV row per grid row, shortest round-trip floats."""
    rows = field.values if field.grid.dim == 2 else field.values.reshape(1, -1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def read_field_csv(path, grid):
    """Read a field written by write_field_csv; validates the node count."""
    with open(path, newline="") as fh:
        rows = [[float(cell) for cell in row] for row in csv.reader(fh) if row]
    vals = np.asarray(rows, dtype=np.float64)
    if vals.size != grid.num_nodes:
        raise ValueError(
            f"CSV holds {vals.size} values but the grid has {grid.num_nodes} nodes"
        )
    return Field(grid, vals.reshape(grid.shape))


@dataclass(frozen=True)
class TimeSpec:
    """Uniform partition of [0, T] into N steps of size k = T/N."""

    terminal_time: float
    num_steps: int

    def __post_init__(self):
        if self.terminal_time <= 0:
            raise ValueError(f"terminal time must be positive, got {self.terminal_time}")
        if self.num_steps < 1:
            raise ValueError(f"need at least one time step, got {self.num_steps}")

    @property
    def k(self):
        return self.terminal_time / self.num_steps

    def t(self, n):
        if not 0 <= n <= self.num_steps:
            raise IndexError(f"time index {n} outside [0, {self.num_steps}]")
        # n*T/N rather than n*k: lands exactly on T at n = N.
        return self.terminal_time * (n / self.num_steps)
