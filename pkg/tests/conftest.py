"""Shared fixtures: a repo-local reference cache and jit warm-up.

The cache fixture keeps fine-grid references out of the user's home cache
and lets expensive ones (experiment4 at 512 cells) be built once and reused
by every later test run. The warm-up fixture compiles the jit kernels on toy
instances so tests with runtime budgets measure solve cost, not compiler
cost.
"""

import os

import numpy as np
import pytest

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
REPO_CACHE = os.path.join(REPO_ROOT, ".hjbmarch-cache")


@pytest.fixture(scope="session", autouse=True)
def shared_truth_cache():
    old = os.environ.get("HJBMARCH_CACHE")
    os.environ["HJBMARCH_CACHE"] = REPO_CACHE
    yield REPO_CACHE
    if old is None:
        os.environ.pop("HJBMARCH_CACHE", None)
    else:
        os.environ["HJBMARCH_CACHE"] = old


@pytest.fixture(scope="session", autouse=True)
def warm_kernels(shared_truth_cache):
    from hjbmarch.advect1d import march_1d
    from hjbmarch.fast_marching import SliceInputs, solve_slice
    from hjbmarch.geometry import Field
    from hjbmarch.marchers import make_config, march
    from hjbmarch.oracle import gauss_seidel_slice
    from hjbmarch.problems import advection_catalog, experiment1
    from hjbmarch.selftest import _random_slice_instance

    p = experiment1()
    for scheme, r in (("explicit", 1.0), ("implicit", 2.0), ("hybrid", 2.0)):
        march(p, make_config(p, 8, scheme, r=r))
    case = advection_catalog("fig2d")
    for scheme in ("explicit", "implicit", "hybrid", "semilagrangian"):
        march_1d(case, 9, scheme, r=1.0)

    rng = np.random.default_rng(0)
    grid, v_next, q_mask, q_values, fmap, kmap = _random_slice_instance(rng, 8)
    inputs = SliceInputs(
        v_next=Field(grid, v_next), q_mask=q_mask, q_values=q_values,
        k=0.1, t_n=0.0, fmap=fmap, kmap=kmap,
    )
    solve_slice(inputs)
    gauss_seidel_slice(inputs)
