"""Average-velocity series over clipped trajectories."""

import numpy as np
import pytest

from mobstab.errors import TooFewFixes
from mobstab.geometry import ReferenceFrame, Trajectory, haversine_m
from mobstab.velocity import ScalarProcessSeries, average_velocity_series, path_length


def _east_track(meters: list[float], times: list[float]) -> Trajectory:
    """Fixes marching east along lat 46.5, given cumulative meters."""
    lat = 46.5
    k = haversine_m(8.0, lat, 9.0, lat)  # meters per degree east here
    lons = [8.0 + m / k for m in meters]
    return Trajectory.from_arrays("p", times, lons, [lat] * len(times))


class TestSeriesType:
    def test_ordering_and_bounds_enforced(self):
        with pytest.raises(ValueError):
            ScalarProcessSeries(((1.0, 2.0), (1.0, 3.0)), horizon=10.0)
        with pytest.raises(ValueError):
            ScalarProcessSeries(((11.0, 2.0),), horizon=10.0)
        with pytest.raises(ValueError):
            ScalarProcessSeries(((1.0, -2.0),), horizon=10.0)
        s = ScalarProcessSeries(((1.0, 2.0), (2.0, 1.0)), horizon=10.0)
        assert s.terminal_value == 1.0
        assert len(s) == 2


class TestPathLength:
    def test_hand_track(self):
        traj = _east_track([0.0, 100.0, 300.0], [0.0, 10.0, 20.0])
        assert path_length(traj, 20.0) == pytest.approx(300.0, rel=1e-4)
        assert path_length(traj, 15.0) == pytest.approx(100.0, rel=1e-4)
        assert path_length(traj, 5.0) == 0.0

    def test_formula_consistency(self):
        traj = _east_track([0.0, 500.0], [0.0, 10.0])
        h = path_length(traj, 10.0, "haversine")
        e = path_length(traj, 10.0, "ellipsoid")
        assert abs(h - e) / h < 0.007


class TestAverageVelocity:
    def test_constant_speed_track(self):
        # 1 m/s east, fixes every 10 s over a 100 s frame
        frame = ReferenceFrame(0.0, 100.0)
        times = [float(x) for x in range(0, 101, 10)]
        traj = _east_track([float(x) for x in range(0, 101, 10)], times)
        series = average_velocity_series(traj, frame)
        assert len(series) == 10
        for tau, v in series.samples:
            assert v == pytest.approx(1.0, rel=1e-4)
        assert series.samples[-1][0] == 100.0

    def test_chord_undershoots_detour(self):
        # out-and-back inside one gap: the chord sees less than the path
        frame = ReferenceFrame(0.0, 100.0)
        out_back = _east_track([0.0, 400.0, 0.0], [0.0, 50.0, 100.0])
        series = average_velocity_series(out_back, frame)
        assert series.terminal_value == pytest.approx(8.0, rel=1e-4)
        sparse = Trajectory("p", (out_back.fixes[0], out_back.fixes[2]))
        sparse_series = average_velocity_series(sparse, frame)
        assert sparse_series.terminal_value == pytest.approx(0.0, abs=1e-9)

    def test_tau_measured_from_frame_start(self):
        frame = ReferenceFrame(0.0, 100.0)
        traj = _east_track([0.0, 30.0], [60.0, 90.0])
        series = average_velocity_series(traj, frame)
        (tau, v), = series.samples
        assert tau == 90.0
        assert v == pytest.approx(30.0 / 90.0, rel=1e-4)

    def test_too_few_fixes(self):
        frame = ReferenceFrame(0.0, 100.0)
        with pytest.raises(TooFewFixes):
            average_velocity_series(_east_track([0.0], [50.0]), frame)

    def test_unclipped_trajectory_rejected(self):
        frame = ReferenceFrame(0.0, 10.0)
        with pytest.raises(ValueError):
            average_velocity_series(_east_track([0.0, 10.0], [5.0, 50.0]), frame)
