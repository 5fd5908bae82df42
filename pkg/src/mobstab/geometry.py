"""Positions, geodesic distances, the analysis grid, and clipping.

Distances default to spherical haversine on the WGS84 mean radius,
which is within 0.6% of the true geodesic everywhere and much closer
at the sub-kilometer scales separating consecutive fixes. An exact
WGS84 ellipsoid solver (Vincenty) is available behind the
``formula="ellipsoid"`` switch for work where that residual matters.

The grid is a local equirectangular projection anchored at the window's
southwest corner: meters east and north are computed with the parallel
scale factor cos(origin latitude), then divided into square cells.
Cells are half-open on both axes, so a point exactly on a shared edge
belongs to the cell with the larger index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# WGS84 ellipsoid
WGS84_A_M = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_B_M = WGS84_A_M * (1.0 - WGS84_F)

# mean radius (2a + b) / 3, used by the spherical formulas
EARTH_RADIUS_M = 6371008.8

DISTANCE_FORMULAS = ("haversine", "ellipsoid")

_RAD = math.pi / 180.0


@dataclass(frozen=True)
class GpsFix:
    """One timestamped position: epoch seconds, WGS84 degrees."""

    t: float
    lon: float
    lat: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.t):
            raise ValueError(f"non-finite timestamp: {self.t!r}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon!r} outside [-180, 180]")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat!r} outside [-90, 90]")


@dataclass(frozen=True)
class ReferenceFrame:
    """Closed observation window [t_min, t_max] in epoch seconds."""

    t_min: float
    t_max: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_min) and math.isfinite(self.t_max)):
            raise ValueError("frame bounds must be finite")
        if self.t_min >= self.t_max:
            raise ValueError(f"empty frame: [{self.t_min}, {self.t_max}]")

    @property
    def horizon(self) -> float:
        return self.t_max - self.t_min

    def contains(self, t: float) -> bool:
        return self.t_min <= t <= self.t_max


@dataclass(frozen=True)
class GridSpec:
    """Square-cell grid over a local window.

    Attributes:
        origin_lon, origin_lat: southwest corner, degrees.
        n_cols, n_rows: grid extent in cells.
        cell_size_m: cell edge length, meters.
    """

    origin_lon: float
    origin_lat: float
    n_cols: int
    n_rows: int
    cell_size_m: float

    def __post_init__(self) -> None:
        if self.n_cols < 1 or self.n_rows < 1:
            raise ValueError("grid must have at least one row and column")
        if not self.cell_size_m > 0:
            raise ValueError("cell size must be positive")
        if not -180.0 <= self.origin_lon <= 180.0:
            raise ValueError("origin longitude outside [-180, 180]")
        # cos(origin_lat) must stay well away from zero for the local
        # projection to make sense
        if not -89.0 <= self.origin_lat <= 89.0:
            raise ValueError("origin latitude outside [-89, 89]")

    @property
    def n_cells(self) -> int:
        return self.n_cols * self.n_rows


Cell = tuple[int, int]  # (row, col)


@dataclass(frozen=True)
class Trajectory:
    """A participant's fixes in strictly increasing time order."""

    participant_id: str
    fixes: tuple[GpsFix, ...]

    def __post_init__(self) -> None:
        ts = [f.t for f in self.fixes]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("fix timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.fixes)

    @classmethod
    def from_arrays(cls, participant_id: str, t, lon, lat) -> "Trajectory":
        fixes = tuple(
            GpsFix(float(a), float(b), float(c)) for a, b, c in zip(t, lon, lat)
        )
        return cls(participant_id, fixes)

    def time_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (t, lon, lat) as float64 arrays."""
        n = len(self.fixes)
        t = np.empty(n)
        lon = np.empty(n)
        lat = np.empty(n)
        for i, f in enumerate(self.fixes):
            t[i] = f.t
            lon[i] = f.lon
            lat[i] = f.lat
        return t, lon, lat


# ---------------------------------------------------------------------------
# distances


def haversine_m(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Great-circle distance on the mean-radius sphere, meters."""
    phi1 = lat1 * _RAD
    phi2 = lat2 * _RAD
    dphi = phi2 - phi1
    dlam = (lon2 - lon1) * _RAD
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def vincenty_m(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Geodesic distance on the WGS84 ellipsoid (Vincenty inverse).

    Falls back to haversine for the rare near-antipodal pairs where the
    iteration does not converge.
    """
    if lon1 == lon2 and lat1 == lat2:
        return 0.0
    f = WGS84_F
    u1 = math.atan((1.0 - f) * math.tan(lat1 * _RAD))
    u2 = math.atan((1.0 - f) * math.tan(lat2 * _RAD))
    big_l = (lon2 - lon1) * _RAD
    sin_u1, cos_u1 = math.sin(u1), math.cos(u1)
    sin_u2, cos_u2 = math.sin(u2), math.cos(u2)

    lam = big_l
    for _ in range(200):
        sin_lam, cos_lam = math.sin(lam), math.cos(lam)
        sin_sigma = math.hypot(
            cos_u2 * sin_lam, cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lam
        )
        if sin_sigma == 0.0:
            return 0.0
        cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_lam
        sigma = math.atan2(sin_sigma, cos_sigma)
        sin_alpha = cos_u1 * cos_u2 * sin_lam / sin_sigma
        cos2_alpha = 1.0 - sin_alpha * sin_alpha
        if cos2_alpha == 0.0:
            cos_2sm = 0.0  # equatorial line
        else:
            cos_2sm = cos_sigma - 2.0 * sin_u1 * sin_u2 / cos2_alpha
        c = f / 16.0 * cos2_alpha * (4.0 + f * (4.0 - 3.0 * cos2_alpha))
        lam_prev = lam
        lam = big_l + (1.0 - c) * f * sin_alpha * (
            sigma + c * sin_sigma * (cos_2sm + c * cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm))
        )
        if abs(lam - lam_prev) < 1e-12:
            break
    else:
        return haversine_m(lon1, lat1, lon2, lat2)

    a2b2 = (WGS84_A_M * WGS84_A_M - WGS84_B_M * WGS84_B_M) / (WGS84_B_M * WGS84_B_M)
    u_sq = cos2_alpha * a2b2
    big_a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)))
    big_b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)))
    delta_sigma = big_b * sin_sigma * (
        cos_2sm
        + big_b / 4.0 * (
            cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)
            - big_b / 6.0 * cos_2sm * (-3.0 + 4.0 * sin_sigma * sin_sigma) * (-3.0 + 4.0 * cos_2sm * cos_2sm)
        )
    )
    return WGS84_B_M * big_a * (sigma - delta_sigma)


def great_circle_distance(a: GpsFix, b: GpsFix, formula: str = "haversine") -> float:
    """Distance between two fixes in meters. Symmetric and nonnegative."""
    if formula == "haversine":
        return haversine_m(a.lon, a.lat, b.lon, b.lat)
    if formula == "ellipsoid":
        return vincenty_m(a.lon, a.lat, b.lon, b.lat)
    raise ValueError(f"unknown distance formula {formula!r}")


def consecutive_distances_m(lon: np.ndarray, lat: np.ndarray, formula: str = "haversine") -> np.ndarray:
    """Distances between consecutive positions; length n-1."""
    if formula == "ellipsoid":
        # no vectorized form; acceptable because the ellipsoid switch is rare
        return np.array(
            [vincenty_m(lon[i], lat[i], lon[i + 1], lat[i + 1]) for i in range(len(lon) - 1)]
        )
    if formula != "haversine":
        raise ValueError(f"unknown distance formula {formula!r}")
    phi = np.radians(lat)
    lam = np.radians(lon)
    dphi = np.diff(phi)
    dlam = np.diff(lam)
    h = np.sin(dphi / 2.0) ** 2 + np.cos(phi[:-1]) * np.cos(phi[1:]) * np.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(h)))


# ---------------------------------------------------------------------------
# grid mapping


def locate_cells(lon: np.ndarray, lat: np.ndarray, grid: GridSpec):
    """Vectorized cell lookup.

    Returns (rows, cols, inside): integer cell indices and a mask that is
    False wherever the point falls outside the grid window. Row/col values
    outside the mask are whatever the projection produced and must not be
    used.
    """
    kx = _RAD * EARTH_RADIUS_M * math.cos(grid.origin_lat * _RAD)
    ky = _RAD * EARTH_RADIUS_M
    x = (np.asarray(lon, dtype=float) - grid.origin_lon) * kx
    y = (np.asarray(lat, dtype=float) - grid.origin_lat) * ky
    cols = np.floor(x / grid.cell_size_m).astype(np.int64)
    rows = np.floor(y / grid.cell_size_m).astype(np.int64)
    inside = (cols >= 0) & (cols < grid.n_cols) & (rows >= 0) & (rows < grid.n_rows)
    return rows, cols, inside


def map_to_cell(fix: GpsFix, grid: GridSpec) -> Cell | None:
    """Cell containing the fix, or None when outside the window."""
    rows, cols, inside = locate_cells(
        np.array([fix.lon]), np.array([fix.lat]), grid
    )
    if not inside[0]:
        return None
    return int(rows[0]), int(cols[0])


def cell_center(grid: GridSpec, row: int, col: int) -> tuple[float, float]:
    """(lon, lat) of a cell's center point."""
    if not (0 <= row < grid.n_rows and 0 <= col < grid.n_cols):
        raise ValueError(f"cell ({row}, {col}) outside grid")
    kx = _RAD * EARTH_RADIUS_M * math.cos(grid.origin_lat * _RAD)
    ky = _RAD * EARTH_RADIUS_M
    x = (col + 0.5) * grid.cell_size_m
    y = (row + 0.5) * grid.cell_size_m
    return grid.origin_lon + x / kx, grid.origin_lat + y / ky


# ---------------------------------------------------------------------------
# clipping


@dataclass(frozen=True)
class ClipStats:
    """Counts of fixes dropped while clipping a trajectory."""

    dropped_outside_frame: int
    dropped_outside_window: int
    empty_after_clip: bool


def clip_to_window(traj: Trajectory, grid: GridSpec, frame: ReferenceFrame) -> tuple[Trajectory, ClipStats]:
    """Drop fixes outside the frame or the grid window.

    An empty result is not an error; it is flagged in the stats so the
    caller can skip the participant and report it.
    """
    if len(traj) == 0:
        return traj, ClipStats(0, 0, True)
    t, lon, lat = traj.time_arrays()
    in_frame = (t >= frame.t_min) & (t <= frame.t_max)
    _, _, in_window = locate_cells(lon, lat, grid)
    keep = in_frame & in_window
    kept = tuple(f for f, k in zip(traj.fixes, keep) if k)
    stats = ClipStats(
        dropped_outside_frame=int((~in_frame).sum()),
        dropped_outside_window=int((in_frame & ~in_window).sum()),
        empty_after_clip=len(kept) == 0,
    )
    return Trajectory(traj.participant_id, kept), stats
