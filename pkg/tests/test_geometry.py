"""Distances, grid mapping, clipping.

The reference arc lengths below were computed independently from the
WGS84 ellipsoid series (meridian arc expansion and parallel circle
radius) and from the mean-radius sphere, then frozen; they are not
outputs of the code under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mobstab.geometry import (
    EARTH_RADIUS_M,
    GpsFix,
    GridSpec,
    ReferenceFrame,
    Trajectory,
    cell_center,
    clip_to_window,
    consecutive_distances_m,
    great_circle_distance,
    haversine_m,
    locate_cells,
    map_to_cell,
    vincenty_m,
)

# WGS84 meridian arc from 46N to 47N, frozen from Gauss-Legendre
# quadrature of the meridian radius of curvature
MERIDIAN_ARC_46_47_M = 111161.08250383184
# one degree of longitude along the equator, WGS84
EQUATOR_DEG_M = 111319.49079327357
# one degree along a great circle on the mean-radius sphere
SPHERE_DEG_M = 111195.0802335329

lons = st.floats(min_value=-180.0, max_value=180.0, allow_nan=False)
lats = st.floats(min_value=-85.0, max_value=85.0, allow_nan=False)


class TestDistances:
    def test_haversine_matches_sphere_reference(self):
        d = haversine_m(8.0, 0.0, 8.0, 1.0)
        assert d == pytest.approx(SPHERE_DEG_M, rel=1e-12)

    def test_vincenty_meridian_arc(self):
        d = vincenty_m(8.0, 46.0, 8.0, 47.0)
        assert d == pytest.approx(MERIDIAN_ARC_46_47_M, rel=1e-12)

    def test_vincenty_equator_arc(self):
        d = vincenty_m(10.0, 0.0, 11.0, 0.0)
        assert d == pytest.approx(EQUATOR_DEG_M, rel=1e-9)

    def test_vincenty_zero_for_coincident_points(self):
        assert vincenty_m(8.1234, 46.9876, 8.1234, 46.9876) == 0.0

    def test_formula_switch(self):
        a = GpsFix(0.0, 8.0, 46.0)
        b = GpsFix(1.0, 8.0, 47.0)
        assert great_circle_distance(a, b, "ellipsoid") == pytest.approx(
            MERIDIAN_ARC_46_47_M, rel=1e-12
        )
        with pytest.raises(ValueError):
            great_circle_distance(a, b, "euclidean")

    @given(lon1=lons, lat1=lats, lon2=lons, lat2=lats)
    @settings(max_examples=200, deadline=None)
    def test_haversine_symmetric_nonnegative(self, lon1, lat1, lon2, lat2):
        d_ab = haversine_m(lon1, lat1, lon2, lat2)
        d_ba = haversine_m(lon2, lat2, lon1, lat1)
        assert d_ab >= 0.0
        assert d_ab == pytest.approx(d_ba, abs=1e-9)
        assert d_ab <= math.pi * EARTH_RADIUS_M + 1e-6

    @given(lon1=lons, lat1=lats, lon2=lons, lat2=lats)
    @settings(max_examples=100, deadline=None)
    def test_vincenty_close_to_haversine(self, lon1, lat1, lon2, lat2):
        # the ellipsoid correction stays below about 0.6%
        h = haversine_m(lon1, lat1, lon2, lat2)
        v = vincenty_m(lon1, lat1, lon2, lat2)
        assert abs(v - h) <= 0.007 * max(h, 1.0)

    def test_consecutive_distances_match_scalar(self):
        lon = np.array([8.0, 8.001, 8.002, 8.001])
        lat = np.array([46.5, 46.501, 46.502, 46.503])
        vec = consecutive_distances_m(lon, lat)
        for i in range(3):
            assert vec[i] == pytest.approx(
                haversine_m(lon[i], lat[i], lon[i + 1], lat[i + 1]), rel=1e-12
            )
        ell = consecutive_distances_m(lon, lat, "ellipsoid")
        for i in range(3):
            assert ell[i] == pytest.approx(
                vincenty_m(lon[i], lat[i], lon[i + 1], lat[i + 1]), rel=1e-12
            )


class TestTypes:
    def test_fix_validation(self):
        with pytest.raises(ValueError):
            GpsFix(float("nan"), 8.0, 46.5)
        with pytest.raises(ValueError):
            GpsFix(0.0, 181.0, 46.5)
        with pytest.raises(ValueError):
            GpsFix(0.0, 8.0, -91.0)

    def test_frame_validation(self):
        with pytest.raises(ValueError):
            ReferenceFrame(1.0, 1.0)
        f = ReferenceFrame(10.0, 20.0)
        assert f.horizon == 10.0
        assert f.contains(10.0) and f.contains(20.0) and not f.contains(20.5)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            GridSpec(8.0, 46.5, 0, 10, 28.0)
        with pytest.raises(ValueError):
            GridSpec(8.0, 46.5, 10, 10, 0.0)
        with pytest.raises(ValueError):
            GridSpec(8.0, 89.5, 10, 10, 28.0)
        assert GridSpec(8.0, 46.5, 4000, 4000, 28.0).n_cells == 16_000_000

    def test_trajectory_ordering_enforced(self):
        with pytest.raises(ValueError):
            Trajectory("p", (GpsFix(1.0, 8.0, 46.5), GpsFix(1.0, 8.0, 46.5)))
        t = Trajectory.from_arrays("p", [1.0, 2.0], [8.0, 8.0], [46.5, 46.5])
        assert len(t) == 2
        arr_t, arr_lon, arr_lat = t.time_arrays()
        assert arr_t.tolist() == [1.0, 2.0]
        assert arr_lon.tolist() == [8.0, 8.0]
        assert arr_lat.tolist() == [46.5, 46.5]


class TestGridMapping:
    def test_origin_cell(self, small_grid):
        assert map_to_cell(GpsFix(0.0, 8.0, 46.5), small_grid) == (0, 0)

    def test_half_open_edges(self, small_grid):
        # a point exactly on a shared edge belongs to the larger index
        lon_edge, lat_edge = cell_center(small_grid, 0, 0)
        rows, cols, inside = locate_cells(
            np.array([lon_edge]), np.array([lat_edge]), small_grid
        )
        assert inside[0] and (rows[0], cols[0]) == (0, 0)

    def test_cell_center_roundtrip(self, small_grid, rng):
        for _ in range(50):
            r = int(rng.integers(0, small_grid.n_rows))
            c = int(rng.integers(0, small_grid.n_cols))
            lon, lat = cell_center(small_grid, r, c)
            assert map_to_cell(GpsFix(0.0, lon, lat), small_grid) == (r, c)

    def test_outside_window(self, small_grid):
        assert map_to_cell(GpsFix(0.0, 7.9, 46.5), small_grid) is None
        assert map_to_cell(GpsFix(0.0, 8.0, 46.4), small_grid) is None
        with pytest.raises(ValueError):
            cell_center(small_grid, 100, 0)

    def test_adjacent_cells_28m_apart(self, small_grid):
        lon0, lat0 = cell_center(small_grid, 0, 0)
        lon1, lat1 = cell_center(small_grid, 0, 1)
        d = haversine_m(lon0, lat0, lon1, lat1)
        assert d == pytest.approx(28.0, rel=1e-3)


class TestClipping:
    def test_clip_counts(self, small_grid):
        frame = ReferenceFrame(0.0, 100.0)
        traj = Trajectory.from_arrays(
            "p",
            [ -5.0, 10.0, 20.0, 30.0, 200.0],
            [8.001, 8.001, 7.5, 8.001, 8.001],
            [46.501, 46.501, 46.501, 46.501, 46.501],
        )
        clipped, stats = clip_to_window(traj, small_grid, frame)
        assert len(clipped) == 2
        assert stats.dropped_outside_frame == 2
        assert stats.dropped_outside_window == 1
        assert not stats.empty_after_clip

    def test_clip_to_empty_is_flagged(self, small_grid):
        frame = ReferenceFrame(0.0, 100.0)
        traj = Trajectory.from_arrays("p", [200.0], [8.001], [46.501])
        clipped, stats = clip_to_window(traj, small_grid, frame)
        assert len(clipped) == 0
        assert stats.empty_after_clip
