"""Activity distributions: share of time spent in each grid cell.

Four estimators are provided. The naive estimator is the empirical fix
frequency and is consistent only under uniform-in-time sampling. The
weighted estimator reweights fixes by inverse sampling density. The
ordinary proportional-time estimator allocates to each fix the span
between its temporal neighbors, using the frame bounds as virtual
neighbors at the edges; its masses sum to one by construction because
the weights telescope to exactly the denominator. The conservative
estimator only counts gaps whose both endpoints lie in the same cell,
trading bias for robustness to unobserved excursions, and fails
loudly when no such gap exists.

Distributions are sparse maps keyed by cell; cells never visited are
simply absent. Nothing here ever materializes a dense grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np

from .errors import EmptySequence, NonpositiveDensity, NoStationaryPairs, TooFewFixes
from .geometry import GridSpec, ReferenceFrame, Trajectory, locate_cells

MASS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CellSequence:
    """Time-ordered cell visits within one reference frame.

    entries: (t, cell) pairs, t strictly increasing and inside the
    frame. Cells may be any hashable key; the pipeline uses (row, col).
    """

    entries: tuple[tuple[float, Hashable], ...]
    frame: ReferenceFrame

    def __post_init__(self) -> None:
        prev = None
        for t, _ in self.entries:
            if prev is not None and t <= prev:
                raise ValueError("entry times must be strictly increasing")
            if not self.frame.contains(t):
                raise ValueError(f"entry at t={t} outside frame")
            prev = t

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SamplingDensity:
    """Per-entry sampling density values, strictly positive.

    Only ratios matter to the weighted estimator, so any positive
    rescaling of the weights describes the same density.
    """

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not w > 0.0 for w in self.weights):
            raise NonpositiveDensity("density weights must be strictly positive")


@dataclass(frozen=True)
class ActivityDistribution:
    """Sparse probability mass over grid cells.

    n_cells_total records the grid size when known; it does not affect
    any computation because absent cells carry zero mass.
    """

    mass: Mapping[Hashable, float]
    n_cells_total: int | None = None

    def __post_init__(self) -> None:
        total = 0.0
        for cell, m in self.mass.items():
            if m < 0.0:
                raise ValueError(f"negative mass {m} for cell {cell}")
            total += m
        if self.mass and abs(total - 1.0) > MASS_TOLERANCE:
            raise ValueError(f"mass sums to {total}, expected 1")

    def __len__(self) -> int:
        return len(self.mass)


def l1_distance(a: ActivityDistribution | Mapping, b: ActivityDistribution | Mapping) -> float:
    """L1 distance over the union of supports."""
    ma = a.mass if isinstance(a, ActivityDistribution) else a
    mb = b.mass if isinstance(b, ActivityDistribution) else b
    keys = set(ma) | set(mb)
    return sum(abs(ma.get(k, 0.0) - mb.get(k, 0.0)) for k in keys)


def cell_sequence(traj: Trajectory, grid: GridSpec, frame: ReferenceFrame) -> CellSequence:
    """Map a clipped trajectory onto the grid.

    Raises:
        ValueError: some fix falls outside the grid window, meaning the
            trajectory was not clipped first.
    """
    t, lon, lat = traj.time_arrays()
    rows, cols, inside = locate_cells(lon, lat, grid)
    if not inside.all():
        raise ValueError(f"{traj.participant_id}: fixes outside grid window; clip first")
    entries = tuple(
        (float(ti), (int(r), int(c))) for ti, r, c in zip(t, rows, cols)
    )
    return CellSequence(entries=entries, frame=frame)


# ---------------------------------------------------------------------------
# estimators


def naive_estimator(seq: CellSequence, n_cells_total: int | None = None) -> ActivityDistribution:
    """Empirical fix frequency per cell."""
    if len(seq) == 0:
        raise EmptySequence("cannot estimate from an empty cell sequence")
    n = len(seq)
    mass: dict[Hashable, float] = {}
    for _, cell in seq.entries:
        mass[cell] = mass.get(cell, 0.0) + 1.0
    for cell in mass:
        mass[cell] /= n
    return ActivityDistribution(mass=mass, n_cells_total=n_cells_total)


def weighted_estimator(
    seq: CellSequence, density: SamplingDensity, n_cells_total: int | None = None
) -> ActivityDistribution:
    """Inverse-density-weighted fix frequency.

    Weights are normalized by the first entry's density before use, so a
    constant density reproduces the naive estimator exactly, not merely
    up to rounding.
    """
    if len(seq) == 0:
        raise EmptySequence("cannot estimate from an empty cell sequence")
    if len(density.weights) != len(seq):
        raise ValueError("density weights must match the sequence length")
    ref = density.weights[0]
    inv = [ref / w for w in density.weights]
    denom = sum(inv)
    mass: dict[Hashable, float] = {}
    for (_, cell), u in zip(seq.entries, inv):
        mass[cell] = mass.get(cell, 0.0) + u
    for cell in mass:
        mass[cell] /= denom
    return ActivityDistribution(mass=mass, n_cells_total=n_cells_total)


def estimate_density_weights(seq: CellSequence) -> SamplingDensity:
    """Sampling density estimated from gaps between observation times.

    Each entry's raw weight is the reciprocal of the span between its
    temporal neighbors, with the frame bounds standing in at the two
    ends; weights are normalized to sum to one. A single entry gets the
    reciprocal frame length, normalized to exactly 1.
    """
    if len(seq) == 0:
        raise EmptySequence("cannot estimate density from an empty cell sequence")
    t = [e[0] for e in seq.entries]
    n = len(t)
    lo, hi = seq.frame.t_min, seq.frame.t_max
    omegas = []
    for i in range(n):
        left = t[i - 1] if i > 0 else lo
        right = t[i + 1] if i < n - 1 else hi
        span = right - left
        if not span > 0.0:
            raise NonpositiveDensity(f"degenerate neighbor span at t={t[i]}")
        omegas.append(1.0 / span)
    total = sum(omegas)
    return SamplingDensity(weights=tuple(w / total for w in omegas))


def ordinary_estimator(seq: CellSequence, n_cells_total: int | None = None) -> ActivityDistribution:
    """Proportional-time estimator.

    Allocates to each fix the span between its temporal neighbors, with
    the frame bounds as virtual neighbors at the edges, and normalizes
    by frame length plus inner span. The weights telescope to exactly
    that denominator, so the masses always sum to one.
    """
    if len(seq) == 0:
        raise EmptySequence("cannot estimate from an empty cell sequence")
    t = [e[0] for e in seq.entries]
    n = len(t)
    lo, hi = seq.frame.t_min, seq.frame.t_max
    denom = (hi - lo) + (t[-1] - t[0])
    mass: dict[Hashable, float] = {}
    for i, (_, cell) in enumerate(seq.entries):
        left = t[i - 1] if i > 0 else lo
        right = t[i + 1] if i < n - 1 else hi
        mass[cell] = mass.get(cell, 0.0) + (right - left)
    for cell in mass:
        mass[cell] /= denom
    return ActivityDistribution(mass=mass, n_cells_total=n_cells_total)


def conservative_estimator(seq: CellSequence, n_cells_total: int | None = None) -> ActivityDistribution:
    """Stationary-gap estimator.

    Only gaps whose endpoints share a cell contribute, each to that
    cell. Excursions that change cell are discarded entirely rather
    than guessed at.

    Raises:
        TooFewFixes: fewer than two entries, so no gap exists.
        NoStationaryPairs: every gap changes cell; the caller decides
            whether to skip the period or choose another estimator.
    """
    if len(seq) == 0:
        raise EmptySequence("cannot estimate from an empty cell sequence")
    if len(seq) < 2:
        raise TooFewFixes("conservative estimator needs >= 2 entries")
    mass: dict[Hashable, float] = {}
    denom = 0.0
    for (t0, c0), (t1, c1) in zip(seq.entries, seq.entries[1:]):
        if c0 == c1:
            dt = t1 - t0
            mass[c0] = mass.get(c0, 0.0) + dt
            denom += dt
    if denom == 0.0:
        raise NoStationaryPairs("no consecutive entries share a cell")
    for cell in mass:
        mass[cell] /= denom
    return ActivityDistribution(mass=mass, n_cells_total=n_cells_total)


def ordinary_estimator_arrays(
    t: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    frame: ReferenceFrame,
    n_cells_total: int | None = None,
) -> ActivityDistribution:
    """Proportional-time estimator on raw arrays.

    Same arithmetic as ordinary_estimator, fix for fix, but without
    building a CellSequence; this is the lane for multi-million-row
    files where per-fix Python objects would dominate the runtime.
    Times must be strictly increasing and inside the frame, cells
    nonnegative (already clipped to the window).
    """
    n = len(t)
    if n == 0:
        raise EmptySequence("cannot estimate from an empty cell sequence")
    lo, hi = frame.t_min, frame.t_max
    w = np.empty(n)
    if n == 1:
        w[0] = hi - lo
    else:
        w[0] = t[1] - lo
        w[-1] = hi - t[-2]
        w[1:-1] = t[2:] - t[:-2]
    denom = (hi - lo) + (float(t[-1]) - float(t[0]))
    # pack (row, col) into one int64 so np.unique can group cells
    key = (rows.astype(np.int64) << 32) + cols.astype(np.int64)
    uniq, inv = np.unique(key, return_inverse=True)
    sums = np.bincount(inv, weights=w, minlength=len(uniq))
    mass = {
        (int(k >> 32), int(k & 0xFFFFFFFF)): float(s) / denom
        for k, s in zip(uniq.tolist(), sums.tolist())
    }
    return ActivityDistribution(mass=mass, n_cells_total=n_cells_total)


ESTIMATORS = {
    "naive": naive_estimator,
    "ordinary": ordinary_estimator,
    "conservative": conservative_estimator,
}
