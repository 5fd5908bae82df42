"""Last crossing times of relative-error processes.

The absolute percentage error of a series compares each sample to the
terminal value; the last crossing time at threshold gamma is the
latest elapsed time at which that error still exceeds gamma (strictly),
or zero when it never does. Small last crossing times mean the process
settled early.

The cohort-level mean error (MAPE) aligns participants on a common
evaluation grid by carrying each participant's last observed error
forward, and counts an error of 1 before a participant's first sample,
mirroring how a terminal-value guess of zero would score.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Sequence

from .errors import EmptyCohort, MixedGamma, ZeroTerminalValue
from .units import WEEK_SECONDS
from .velocity import ScalarProcessSeries


@dataclass(frozen=True)
class ApeSeries:
    """Absolute percentage error samples over (0, horizon].

    Produced by ape_series, whose construction makes the final sample
    exactly zero. Series of averaged errors may be wrapped in this type
    too when they are meant to feed last_crossing_time.
    """

    samples: tuple[tuple[float, float], ...]
    horizon: float

    def __post_init__(self) -> None:
        prev = 0.0
        for tau, value in self.samples:
            if tau <= prev:
                raise ValueError("sample times must be strictly increasing and positive")
            if value < 0.0:
                raise ValueError("percentage errors are nonnegative")
            prev = tau

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class LctResult:
    """Last crossing time in seconds at a given threshold."""

    gamma: float
    lct: float


def ape_series(z: ScalarProcessSeries) -> ApeSeries:
    """Relative deviation of each sample from the series' final value.

    Raises:
        ZeroTerminalValue: the final sample is zero, so relative errors
            are undefined.
    """
    if len(z) == 0:
        raise ValueError("cannot build an error series from an empty series")
    terminal = z.terminal_value
    if terminal == 0.0:
        raise ZeroTerminalValue("terminal value is zero")
    samples = tuple((tau, abs(v - terminal) / terminal) for tau, v in z.samples)
    return ApeSeries(samples=samples, horizon=z.horizon)


def last_crossing_time(ape: ApeSeries, gamma: float) -> LctResult:
    """Latest sample time whose error strictly exceeds gamma, else 0.

    Samples exactly equal to gamma do not count as crossings.
    """
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    lct = 0.0
    for tau, value in ape.samples:
        if value > gamma:
            lct = tau
    return LctResult(gamma=gamma, lct=lct)


def weekly_ticks(horizon: float) -> tuple[float, ...]:
    """Whole-week marks up to the horizon, horizon appended if needed."""
    n = int(horizon / WEEK_SECONDS + 1e-9)
    ticks = [k * WEEK_SECONDS for k in range(1, n + 1)]
    if not ticks or ticks[-1] < horizon - 1e-9:
        ticks.append(horizon)
    return tuple(ticks)


def step_value(ape: ApeSeries, tau: float) -> float:
    """Error at tau under last-observation-carried-forward alignment.

    Before the first sample the error counts as 1.
    """
    taus = [s[0] for s in ape.samples]
    i = bisect_right(taus, tau)
    if i == 0:
        return 1.0
    return ape.samples[i - 1][1]


def mape(apes: Sequence[ApeSeries], eval_taus: Sequence[float] | None = None) -> ScalarProcessSeries:
    """Mean error across participants on a shared evaluation grid.

    All series must share one horizon (one cohort frame). The default
    grid is weekly ticks over that horizon. The result is a scalar
    series; wrap it in ApeSeries to take its last crossing time.
    """
    if not apes:
        raise EmptyCohort("mape over zero participants")
    horizon = apes[0].horizon
    if any(abs(a.horizon - horizon) > 1e-9 for a in apes):
        raise ValueError("all error series must share the cohort horizon")
    if eval_taus is None:
        eval_taus = weekly_ticks(horizon)
    samples = tuple(
        (float(tau), fmean(step_value(a, tau) for a in apes)) for tau in eval_taus
    )
    return ScalarProcessSeries(samples=samples, horizon=horizon)


def lct_mape(
    apes: Sequence[ApeSeries], gamma: float, eval_taus: Sequence[float] | None = None
) -> LctResult:
    """Last crossing time of the cohort mean error."""
    series = mape(apes, eval_taus)
    return last_crossing_time(ApeSeries(series.samples, series.horizon), gamma)


def mean_lct(results: Iterable[LctResult]) -> LctResult:
    """Arithmetic mean of last crossing times computed at one gamma.

    Raises:
        EmptyCohort: nothing to average.
        MixedGamma: the inputs were computed at different thresholds.
    """
    results = list(results)
    if not results:
        raise EmptyCohort("mean over zero last crossing times")
    gamma = results[0].gamma
    if any(r.gamma != gamma for r in results):
        raise MixedGamma("cannot average last crossing times across thresholds")
    return LctResult(gamma=gamma, lct=fmean(r.lct for r in results))
