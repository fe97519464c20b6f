import math

import numpy as np
import pytest

from app.exceptions import FormatError, GridError, InvalidArgumentError
from app.grid import (
    SphereGrid,
    ball_membership,
    distance_matrix,
    epsilon_ball,
    fekete_grid,
    gaussian_grid,
    great_circle_angle,
    hemisphere_mask,
    isotropy_summary,
    latlon_to_xyz,
    nearest_neighbor_angles,
    subset_grid,
    xyz_to_latlon,
)


def test_great_circle_angle_closed_forms():
    x, y, z = np.eye(3)
    assert great_circle_angle(x, x) == 0.0
    assert great_circle_angle(x, y) == pytest.approx(math.pi / 2, abs=1e-15)
    assert great_circle_angle(z, -z) == pytest.approx(math.pi, abs=1e-15)


def test_great_circle_angle_rejects_non_unit():
    with pytest.raises(InvalidArgumentError):
        great_circle_angle([2.0, 0.0, 0.0], [0.0, 1.0, 0.0])


def test_great_circle_angle_small_separation():
    u = latlon_to_xyz(np.array([10.0]), np.array([20.0]))[0]
    v = latlon_to_xyz(np.array([10.0]), np.array([20.0 + 1e-6]))[0]
    expected = math.radians(1e-6) * math.cos(math.radians(10.0))
    assert great_circle_angle(u, v) == pytest.approx(expected, rel=1e-6)


def test_latlon_roundtrip():
    lat = np.array([-89.0, -45.0, 0.0, 30.0, 89.5])
    lon = np.array([0.0, 90.0, 180.0, 270.0, 359.0])
    back_lat, back_lon = xyz_to_latlon(latlon_to_xyz(lat, lon))
    np.testing.assert_allclose(back_lat, lat, atol=1e-10)
    np.testing.assert_allclose(back_lon, lon, atol=1e-10)


def test_grid_rejects_non_unit_points():
    with pytest.raises(InvalidArgumentError):
        SphereGrid(np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.0]]))


def test_grid_rejects_coinciding_points():
    with pytest.raises(GridError) as info:
        SphereGrid.from_latlon(np.array([10.0, -20.0, 10.0]), np.array([0.0, 45.0, 360.0]))
    assert "0 and 2" in str(info.value)
    with pytest.raises(InvalidArgumentError):
        SphereGrid(np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]))
    assert SphereGrid.from_latlon(np.array([10.0, 10.0]), np.array([0.0, 0.01])).size == 2


def test_grid_points_are_read_only(coarse_grid):
    with pytest.raises(ValueError):
        coarse_grid.points[0, 0] = 0.0


def test_gaussian_grid_layout():
    grid = gaussian_grid(30.0)
    assert grid.size == 72
    assert grid.kind == "gaussian"
    np.testing.assert_allclose(np.unique(np.round(grid.lat_deg, 9)), [-75, -45, -15, 15, 45, 75])


def test_gaussian_grid_five_degrees_size():
    assert gaussian_grid(5.0).size == 72 * 36


def test_gaussian_grid_rejects_non_divisor():
    with pytest.raises(InvalidArgumentError):
        gaussian_grid(7.0)


def test_distance_matrix_properties(coarse_grid):
    d = distance_matrix(coarse_grid)
    assert d.shape == (72, 72)
    np.testing.assert_array_equal(d, d.T)
    assert np.all(np.diag(d) == 0.0)
    assert d.min() >= 0.0 and d.max() <= math.pi
    assert distance_matrix(coarse_grid) is d


def test_distance_matrix_matches_great_circle(coarse_grid):
    d = distance_matrix(coarse_grid)
    pts = coarse_grid.points
    for i, j in [(0, 1), (3, 40), (10, 71)]:
        assert d[i, j] == pytest.approx(great_circle_angle(pts[i], pts[j]), abs=1e-12)


def test_epsilon_ball_edges(coarse_grid):
    assert epsilon_ball(coarse_grid, 5, 0.0) == {5}
    assert epsilon_ball(coarse_grid, 5, math.pi) == set(range(72))
    with pytest.raises(InvalidArgumentError):
        epsilon_ball(coarse_grid, 72, 0.1)
    with pytest.raises(InvalidArgumentError):
        epsilon_ball(coarse_grid, 0, -0.1)


def test_ball_membership_matches_epsilon_ball(coarse_grid):
    eps = math.radians(35.0)
    members = ball_membership(coarse_grid, eps)
    for i in (0, 17, 50):
        assert set(np.flatnonzero(members[i]).tolist()) == epsilon_ball(coarse_grid, i, eps)


def test_csv_roundtrip(tmp_path, coarse_grid):
    path = coarse_grid.to_csv(tmp_path / "grid.csv")
    loaded = SphereGrid.from_csv(path)
    np.testing.assert_allclose(loaded.points, coarse_grid.points, atol=1e-12)


def test_csv_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("index,lat_deg\n0,1.0\n")
    with pytest.raises(FormatError):
        SphereGrid.from_csv(path)


def test_fekete_grid_deterministic_per_seed():
    a = fekete_grid(60, iterations=20, seed=3)
    b = fekete_grid(60, iterations=20, seed=3)
    c = fekete_grid(60, iterations=20, seed=4)
    np.testing.assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)
    assert a.kind == "fekete"


def test_fekete_descent_lowers_energy():
    start = fekete_grid(120, iterations=0, seed=0)
    relaxed = fekete_grid(120, iterations=100, seed=0)
    assert relaxed.metadata["log_energy"] < start.metadata["log_energy"]


def test_fekete_two_points_are_antipodal():
    grid = fekete_grid(2, iterations=1000, seed=0)
    assert distance_matrix(grid)[0, 1] == pytest.approx(math.pi, abs=1e-6)


def test_fekete_four_points_form_tetrahedron():
    grid = fekete_grid(4, iterations=1000, seed=0)
    iu = np.triu_indices(4, k=1)
    np.testing.assert_allclose(distance_matrix(grid)[iu], math.acos(-1.0 / 3.0), atol=1e-3)


def test_fekete_more_isotropic_than_gaussian(fekete_small, coarse_grid):
    assert isotropy_summary(fekete_small)["cv_nn"] < isotropy_summary(coarse_grid)["cv_nn"]


def test_fekete_rejects_tiny_grid():
    with pytest.raises(InvalidArgumentError):
        fekete_grid(1)


def test_nearest_neighbor_angles_positive(fekete_small):
    nn = nearest_neighbor_angles(fekete_small)
    assert nn.shape == (120,)
    assert np.all(nn > 0)


def test_subset_and_hemisphere(coarse_grid):
    north = hemisphere_mask(coarse_grid, north=True)
    assert north.sum() == 36
    sub = subset_grid(coarse_grid, north)
    assert sub.size == 36
    np.testing.assert_array_equal(sub.metadata["source_indices"], np.flatnonzero(north))
    with pytest.raises(InvalidArgumentError):
        subset_grid(coarse_grid, np.zeros(72, dtype=bool))


@pytest.mark.slow
def test_fekete_desk_scale_spacing():
    grid = fekete_grid(5981, seed=0)
    summary = isotropy_summary(grid)
    assert 2.2 < summary["mean_nn_deg"] < 2.9
    assert summary["max_min_ratio"] < 1.5
    ball_sizes = ball_membership(grid, math.radians(5.0)).sum(axis=1)
    assert 9.0 < ball_sizes.mean() < 14.0
