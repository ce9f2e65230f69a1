"""Grid, field, boundary-mask, and time-partition behavior."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hjbmarch.geometry import (
    DIRICHLET,
    INTERIOR,
    OUTFLOW,
    Field,
    TimeSpec,
    boundary_mask,
    field_from_function,
    field_full,
    make_grid,
    neighbors,
    read_field_csv,
    write_field_csv,
)


def test_five_point_grid_spacing():
    assert make_grid(2, 5).h == 0.25


def test_three_point_1d_nodes():
    grid = make_grid(1, 3)
    assert np.array_equal(grid.axis_coords(), [0.0, 0.5, 1.0])


def test_too_few_points_rejected():
    with pytest.raises(ValueError):
        make_grid(2, 2)


def test_degenerate_extents_rejected():
    with pytest.raises(ValueError):
        make_grid(1, 5, (1.0, 1.0))
    with pytest.raises(ValueError):
        make_grid(2, 5, (2.0, -1.0))


def test_unsupported_dim_rejected():
    with pytest.raises(ValueError):
        make_grid(3, 5)


def test_mixed_extent_widths_rejected():
    with pytest.raises(ValueError):
        make_grid(2, 5, ((0.0, 1.0), (0.0, 2.0)))


@given(st.integers(min_value=3, max_value=400))
def test_spacing_spans_the_box(m):
    grid = make_grid(2, m)
    lo, hi = grid.extents[0]
    assert grid.h * (m - 1) == pytest.approx(hi - lo, rel=1e-12)
    assert grid.axis_coords()[-1] == pytest.approx(hi, abs=1e-12)


def test_flat_index_round_trips():
    for m in (3, 17, 64):
        grid = make_grid(2, m)
        for i in range(m):
            for j in range(m):
                assert grid.unflat(grid.flat_index((i, j))) == (i, j)
        assert grid.flat_index((0, 0)) == 0
        assert grid.flat_index((m - 1, m - 1)) == grid.num_nodes - 1


def test_flat_index_matches_row_major_ravel():
    grid = make_grid(2, 6)
    vals = np.arange(36.0).reshape(6, 6)
    field = Field(grid, vals)
    for node in ((0, 0), (2, 3), (5, 0), (5, 5)):
        assert field.flat()[grid.flat_index(node)] == vals[node]


def test_out_of_range_nodes_rejected():
    grid = make_grid(2, 4)
    with pytest.raises(IndexError):
        grid.flat_index((4, 0))
    with pytest.raises(IndexError):
        grid.unflat(grid.num_nodes)


def test_node_coordinates():
    grid = make_grid(2, 5)
    assert grid.coord((0, 0)) == (0.0, 0.0)
    assert grid.coord((1, 3)) == (0.25, 0.75)
    assert grid.coord((4, 4)) == (1.0, 1.0)


def test_corner_neighbors():
    grid = make_grid(2, 5)
    out = neighbors(grid, (0, 0))
    present = [nb for _, _, nb in out if nb is not None]
    absent = [nb for _, _, nb in out if nb is None]
    assert len(present) == 2 and len(absent) == 2
    assert set(present) == {(1, 0), (0, 1)}


def test_interior_neighbors():
    grid = make_grid(2, 5)
    present = [nb for _, _, nb in neighbors(grid, (2, 2)) if nb is not None]
    assert set(present) == {(1, 2), (3, 2), (2, 1), (2, 3)}


def test_1d_endpoint_neighbors():
    grid = make_grid(1, 5)
    out = neighbors(grid, 0)
    assert [nb for _, _, nb in out if nb is not None] == [(1,)]


def test_field_accepts_flat_values_and_inf():
    grid = make_grid(2, 3)
    field = Field(grid, np.arange(9.0))
    assert field.values.shape == (3, 3)
    field.values[1, 1] = np.inf
    assert field.copy().values[1, 1] == np.inf


def test_field_rejects_wrong_size():
    with pytest.raises(ValueError):
        Field(make_grid(2, 3), np.zeros(8))


def test_field_from_function_samples_coordinates():
    grid = make_grid(2, 5)
    field = field_from_function(grid, lambda x, y, t: x + 10.0 * y + t, t=100.0)
    assert field.values[1, 3] == pytest.approx(0.25 + 7.5 + 100.0)


def test_field_csv_round_trip(tmp_path):
    grid = make_grid(2, 7)
    rng = np.random.default_rng(3)
    field = Field(grid, rng.normal(size=grid.shape))
    path = tmp_path / "field.csv"
    write_field_csv(field, path)
    back = read_field_csv(path, grid)
    assert np.array_equal(back.values, field.values)


def test_field_csv_round_trip_1d(tmp_path):
    grid = make_grid(1, 9)
    field = Field(grid, np.linspace(-1.0, 1.0, 9))
    path = tmp_path / "field1d.csv"
    write_field_csv(field, path)
    assert np.array_equal(read_field_csv(path, grid).values, field.values)


def test_field_csv_wrong_grid_rejected(tmp_path):
    path = tmp_path / "field.csv"
    write_field_csv(field_full(make_grid(2, 5), 1.0), path)
    with pytest.raises(ValueError):
        read_field_csv(path, make_grid(2, 6))


def test_boundary_mask_covers_edges():
    grid = make_grid(2, 5)
    mask = boundary_mask(grid, dirichlet_edges=("y0",), outflow_edges=("x0", "x1", "y1"))
    kinds = mask.kinds
    assert (kinds[:, 0] == DIRICHLET).all()
    assert (kinds[1:-1, -1] == OUTFLOW).all()
    assert (kinds[0, 1:] == OUTFLOW).all()
    assert (kinds[1:-1, 1:-1] == INTERIOR).all()
    # Corners shared with an outflow edge stay Dirichlet: data wins.
    assert kinds[0, 0] == DIRICHLET and kinds[-1, 0] == DIRICHLET
    assert mask.is_dirichlet().sum() == 5
    assert mask.is_interior().sum() == 9


def test_boundary_mask_all_dirichlet():
    grid = make_grid(2, 4)
    mask = boundary_mask(grid, dirichlet_edges=("x0", "x1", "y0", "y1"))
    assert mask.is_dirichlet().sum() == 12
    assert not mask.is_outflow().any()


def test_boundary_mask_rejects_bad_edge_sets():
    grid = make_grid(2, 4)
    with pytest.raises(ValueError):
        boundary_mask(grid, dirichlet_edges=("north",))
    with pytest.raises(ValueError):
        boundary_mask(grid, dirichlet_edges=("x0",), outflow_edges=("x0", "x1", "y0", "y1"))
    with pytest.raises(ValueError):
        boundary_mask(grid, dirichlet_edges=("x0", "x1"))


def test_boundary_mask_1d():
    grid = make_grid(1, 5)
    mask = boundary_mask(grid, dirichlet_edges=("x0",), outflow_edges=("x1",))
    assert mask.kinds[0] == DIRICHLET
    assert mask.kinds[-1] == OUTFLOW
    assert mask.is_interior().sum() == 3


def test_time_partition():
    time = TimeSpec(terminal_time=1.2, num_steps=7)
    assert time.k * time.num_steps == pytest.approx(1.2, rel=1e-12)
    assert time.t(0) == 0.0
    assert time.t(7) == 1.2
    with pytest.raises(IndexError):
        time.t(8)


def test_time_partition_validation():
    with pytest.raises(ValueError):
        TimeSpec(terminal_time=0.0, num_steps=3)
    with pytest.raises(ValueError):
        TimeSpec(terminal_time=1.0, num_steps=0)
