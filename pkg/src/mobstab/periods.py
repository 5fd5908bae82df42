"""Stability of activity distributions across analysis periods.

The frame is tiled with equal-length periods (a trailing partial
period is dropped). Each period gets its own activity distribution
over its own sub-frame, and running means over the first D periods
trace how the long-run distribution builds up. Two last-crossing-time
measures quantify when that build-up settles: one in L1 distance
between running means, one in the symmetric difference of level sets
of the ranking distribution.

Periods with no data (or, under the conservative estimator, no
stationary pair) are skipped: D counts contributing periods by
default, and the number of skips is reported. The calendar position
of each contributing period is kept so results can also be indexed
by calendar period when configured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

from .activity import (
    ActivityDistribution,
    CellSequence,
    ESTIMATORS,
    l1_distance,
)
from .errors import (
    AllPeriodsEmpty,
    EmptySequence,
    EmptyTerminalLevelSet,
    FrameTooShort,
    NoStationaryPairs,
    TooFewFixes,
)
from .geometry import ReferenceFrame

COUNTING_MODES = ("data", "calendar")


@dataclass(frozen=True)
class PeriodPartition:
    """Equal periods tiling the frame from its start."""

    frame: ReferenceFrame
    period_length: float
    n_periods: int
    dropped_tail_entries: int


@dataclass(frozen=True)
class MeanActivitySeries:
    """Per-period distributions and their running means.

    calendar_indices[d] is the 0-based calendar position of the d-th
    contributing period; n_skipped counts periods without a usable
    estimate.
    """

    per_period: tuple[ActivityDistribution, ...]
    calendar_indices: tuple[int, ...]
    running_means: tuple[ActivityDistribution, ...]
    n_skipped: int

    @property
    def n_periods(self) -> int:
        return len(self.per_period)


@dataclass(frozen=True)
class RankingDistribution:
    """Cumulative mass of cells no more active than each cell.

    Only cells with positive mass appear. The most active cell always
    maps to 1; ties share the cumulative mass of the whole tied group.
    """

    rank_mass: dict[Hashable, float]


@dataclass(frozen=True)
class LevelSet:
    """Cells whose ranking value reaches the level alpha."""

    alpha: float
    cells: frozenset


def split_periods(seq: CellSequence, period_length: float) -> tuple[PeriodPartition, list[CellSequence]]:
    """Assign entries to equal periods; drop the trailing partial one.

    Raises:
        FrameTooShort: the frame does not contain a whole period.
    """
    if not period_length > 0.0:
        raise ValueError("period length must be positive")
    span = seq.frame.horizon
    n_periods = int(span / period_length + 1e-9)
    if n_periods < 1:
        raise FrameTooShort(
            f"frame of {span} s shorter than one period of {period_length} s"
        )
    t_min = seq.frame.t_min
    end = t_min + n_periods * period_length
    tiles_whole_frame = end >= seq.frame.t_max - 1e-6
    buckets: list[list[tuple[float, Hashable]]] = [[] for _ in range(n_periods)]
    dropped = 0
    for t, cell in seq.entries:
        idx = int((t - t_min) / period_length)
        if idx >= n_periods:
            # an entry at the exact frame end belongs to the last period
            # when the frame is a whole number of periods; with a partial
            # tail present, everything past the tiling is dropped
            if tiles_whole_frame and t <= end + 1e-6:
                idx = n_periods - 1
            else:
                dropped += 1
                continue
        buckets[idx].append((t, cell))
    partition = PeriodPartition(seq.frame, period_length, n_periods, dropped)
    sequences = [
        CellSequence(
            entries=tuple(bucket),
            frame=ReferenceFrame(t_min + d * period_length, t_min + (d + 1) * period_length),
        )
        for d, bucket in enumerate(buckets)
    ]
    return partition, sequences


def period_mean_series(
    period_seqs: Sequence[CellSequence],
    estimator: str | Callable[[CellSequence], ActivityDistribution] = "ordinary",
    n_cells_total: int | None = None,
) -> MeanActivitySeries:
    """Estimate each period and accumulate running means.

    Periods that are empty, or that raise NoStationaryPairs under the
    conservative estimator, are skipped and counted.

    Raises:
        AllPeriodsEmpty: no period produced an estimate.
    """
    est = ESTIMATORS[estimator] if isinstance(estimator, str) else estimator
    dists: list[ActivityDistribution] = []
    calendar: list[int] = []
    skipped = 0
    for d, seq in enumerate(period_seqs):
        try:
            dist = est(seq, n_cells_total=n_cells_total)
        except (EmptySequence, NoStationaryPairs, TooFewFixes):
            skipped += 1
            continue
        dists.append(dist)
        calendar.append(d)
    if not dists:
        raise AllPeriodsEmpty(f"none of {len(period_seqs)} periods was estimable")
    running: list[ActivityDistribution] = []
    acc: dict[Hashable, float] = {}
    for depth, dist in enumerate(dists, start=1):
        for cell, m in dist.mass.items():
            acc[cell] = acc.get(cell, 0.0) + m
        running.append(
            ActivityDistribution(
                mass={c: m / depth for c, m in acc.items()},
                n_cells_total=n_cells_total,
            )
        )
    return MeanActivitySeries(
        per_period=tuple(dists),
        calendar_indices=tuple(calendar),
        running_means=tuple(running),
        n_skipped=skipped,
    )


def _crossing_index(series: MeanActivitySeries, exceeded: Sequence[bool], counting: str) -> int:
    """Translate per-depth exceedance flags into a last crossing time.

    Returns the 1-based depth (counting="data") or 1-based calendar
    period number (counting="calendar") of the last exceedance, 0 when
    there is none.
    """
    if counting not in COUNTING_MODES:
        raise ValueError(f"unknown counting mode {counting!r}")
    last = 0
    for depth, flag in enumerate(exceeded, start=1):
        if flag:
            last = depth
    if last == 0:
        return 0
    if counting == "data":
        return last
    return series.calendar_indices[last - 1] + 1


def lct_distribution(series: MeanActivitySeries, gamma: float, counting: str = "data") -> int:
    """Last period depth whose running mean is farther than gamma (L1)
    from the final running mean; 0 when always within gamma."""
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    final = series.running_means[-1]
    exceeded = [l1_distance(rm, final) > gamma for rm in series.running_means]
    return _crossing_index(series, exceeded, counting)


def ranking_distribution(dist: ActivityDistribution) -> RankingDistribution:
    """Cumulative-mass ranking of the cells of a distribution.

    Cells are sorted by mass; each cell's rank value is the share of
    total mass held by cells with mass less than or equal to its own,
    so exact ties share one value and the top group ranks exactly 1.
    Zero-mass cells are excluded.
    """
    items = sorted(
        ((c, m) for c, m in dist.mass.items() if m > 0.0), key=lambda cm: cm[1]
    )
    bounds: list[tuple[int, int, float]] = []
    cum = 0.0
    i = 0
    while i < len(items):
        j = i
        group_mass = 0.0
        while j < len(items) and items[j][1] == items[i][1]:
            group_mass += items[j][1]
            j += 1
        cum += group_mass
        bounds.append((i, j, cum))
        i = j
    total = cum
    rank: dict[Hashable, float] = {}
    for i, j, cum in bounds:
        r = cum / total  # top group divides by itself: exactly 1.0
        for k in range(i, j):
            rank[items[k][0]] = r
    return RankingDistribution(rank_mass=rank)


def level_set(ranking: RankingDistribution, alpha: float) -> LevelSet:
    """Cells whose ranking value is at least alpha.

    Their total mass covers at least 1 - alpha of the distribution.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    cells = frozenset(c for c, r in ranking.rank_mass.items() if r >= alpha)
    return LevelSet(alpha=alpha, cells=cells)


def lct_level_set(
    series: MeanActivitySeries, alpha: float, gamma: float, counting: str = "data"
) -> int:
    """Last period depth whose level set differs from the terminal one
    by more than gamma, relative symmetric difference; 0 when stable.

    Raises:
        EmptyTerminalLevelSet: the final running mean's level set is
            empty, leaving nothing to compare against.
    """
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    terminal = level_set(ranking_distribution(series.running_means[-1]), alpha)
    if not terminal.cells:
        raise EmptyTerminalLevelSet(f"terminal level set at alpha={alpha} is empty")
    size = len(terminal.cells)
    exceeded = []
    for rm in series.running_means:
        current = level_set(ranking_distribution(rm), alpha)
        diff = len(current.cells ^ terminal.cells)
        exceeded.append(diff / size > gamma)
    return _crossing_index(series, exceeded, counting)
