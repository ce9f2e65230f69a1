"""Node-local update formulas for the 2D schemes.

Three families live here: the explicit single-node update and its vectorized
whole-slice form, the stay-in-place cap, and the one-sided/two-sided local
solves used inside the fast-marching slice solver. The local solves are
written as scalar numba kernels over the reduced parameters

    P = W0 + k*K   (value of refusing to move for one step)
    s = k*f        (distance coverable in one step)

so the fast-marching kernel and the Gauss-Seidel test oracle run the exact
same arithmetic. A return of +inf means "no admissible solution": the caller
falls back (two-sided to one-sided, one-sided to the cap P).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit


@dataclass(frozen=True)
class UpwindGradientSample:
    """Componentwise upwind slopes at a node, both >= 0.

    gx = max(backward difference, -forward difference, 0) and likewise gy;
    differences whose neighbor is off-grid are left out of the max.
    """

    gx: float
    gy: float

    @property
    def norm(self):
        return math.hypot(self.gx, self.gy)


def upwind_gradient(values, node, h):
    """Sample the upwind gradient of a 2D value array at node (i, j).

    Off-grid neighbors are excluded by treating them as +inf, which can never
    win a max against the always-admissible 0 slope.
    """
    i, j = node
    m, mj = values.shape
    c = values[i, j]
    left = values[i - 1, j] if i > 0 else math.inf
    right = values[i + 1, j] if i < m - 1 else math.inf
    down = values[i, j - 1] if j > 0 else math.inf
    up = values[i, j + 1] if j < mj - 1 else math.inf
    gx = max(c - left, c - right, 0.0) / h
    gy = max(c - down, c - up, 0.0) / h
    return UpwindGradientSample(gx=gx, gy=gy)


def explicit_node_update(v_next, node, problem, h, k, t_n):
    """One explicit backward step at a single node.

    Uses the upwind gradient of the already-known later slice:
    V = W0 + k*(K - f*|grad|), with f and K evaluated at the node and t_n.
    """
    g = upwind_gradient(v_next.values, node, h)
    x, y = v_next.grid.coord(node)
    f = float(problem.speed(np.float64(x), np.float64(y), t_n))
    cost = float(problem.running_cost(np.float64(x), np.float64(y), t_n))
    return v_next.values[node] + k * (cost - f * g.norm)


def explicit_slice(v_next_values, fmap, kmap, h, k):
    """Vectorized explicit update of a whole slice.

    Equivalent to explicit_node_update at every node (off-grid neighbors
    excluded via +inf padding). fmap and kmap are the speed and cost fields
    at the target time level, broadcastable to the grid shape.
    """
    padded = np.pad(v_next_values, 1, constant_values=np.inf)
    c = v_next_values
    gx = np.maximum(np.maximum(c - padded[:-2, 1:-1], c - padded[2:, 1:-1]), 0.0) / h
    gy = np.maximum(np.maximum(c - padded[1:-1, :-2], c - padded[1:-1, 2:]), 0.0) / h
    grad = np.hypot(gx, gy)
    return c + k * (kmap - fmap * grad)


def stay_in_place(w0, k, cost):
    """Value of not moving for one step: w0 + k*cost. Broadcasts."""
    return w0 + k * cost


@dataclass(frozen=True)
class QuadraticInputs:
    """Inputs to the local solves.

    w0 is the node's value on the later time slice, w1 the value of the
    newly accepted neighbor, w2 (two-sided only) the value of the accepted
    transverse neighbor (min of the two if both are accepted). f and cost
    are the speed and running cost at the node and the target time.
    """

    w0: float
    w1: float
    h: float
    k: float
    f: float
    cost: float
    w2: Optional[float] = None

    @property
    def p(self):
        return self.w0 + self.k * self.cost

    @property
    def s(self):
        return self.k * self.f


@njit(cache=True)
def one_sided_kernel(p, w1, h, s):
    """Smallest admissible root of ((V-w1)/h)^2 = ((p-V)/s)^2.

    The squared equation factors into two linear branches; only
    s*(V-w1) = h*(p-V), i.e. V = (s*w1 + h*p)/(s+h), can satisfy both
    admissibility constraints V >= w1 and p - V > 0, and it does so exactly
    when w1 < p. Returns +inf otherwise (including the w1 == p boundary,
    where the root has a zero modified-speed denominator). The quotient is
    clamped to w1 from below: when p - w1 sits at rounding scale it can
    round an ulp under the admissibility bound, which would let marching
    lock values out of order.
    """
    if not (w1 < p):
        return np.inf
    return max((s * w1 + h * p) / (s + h), w1)


@njit(cache=True)
def two_sided_kernel(p, w1, w2, h, s):
    """Smallest admissible root of ((V-w1)/h)^2 + ((V-w2)/h)^2 = ((p-V)/s)^2.

    Admissible means V >= max(w1, w2) and p - V > 0. Returns +inf when no
    real root is admissible; the caller then falls back to one-sided solves.
    Roots use the cancellation-safe q form; a discriminant within
    1e-12*scale below zero is treated as a double root.
    """
    lower = max(w1, w2)
    a = 2.0 * s * s - h * h
    b = 2.0 * (h * h * p - s * s * (w1 + w2))
    c = s * s * (w1 * w1 + w2 * w2) - h * h * p * p

    disc = b * b - 4.0 * a * c
    scale = max(abs(a), max(abs(b), abs(c)))
    if disc < 0.0:
        if disc >= -1e-12 * scale:
            disc = 0.0
        else:
            return np.inf
    sq = math.sqrt(disc)

    best = np.inf
    if a == 0.0:
        if b == 0.0:
            return np.inf
        v = -c / b
        if v >= lower and p - v > 0.0:
            best = v
        return best
    q = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else -0.5 * sq
    if q == 0.0:
        # b and disc both vanished: double root at the vertex.
        v = -b / (2.0 * a)
        if v >= lower and p - v > 0.0:
            best = v
        return best
    for v in (q / a, c / q):
        if v >= lower and p - v > 0.0 and v < best:
            best = v
    return best


def one_sided_update(inputs):
    """One-neighbor local solve; +inf when no admissible root exists."""
    return float(one_sided_kernel(inputs.p, inputs.w1, inputs.h, inputs.s))


def two_sided_update(inputs):
    """Two-neighbor local solve; +inf signals fallback to one-sided."""
    if inputs.w2 is None:
        raise ValueError("two_sided_update needs w2")
    return float(
        two_sided_kernel(inputs.p, inputs.w1, inputs.w2, inputs.h, inputs.s)
    )
