"""Cohort summaries and demographic group curves.

Groups are the two sexes and three age bands; a participant with both
attributes known belongs to one sex group and one age group at the
same time. Group curves average the per-participant level-set last
crossing times along the level grid, with a percentile-bootstrap
confidence band over participants. Groups smaller than two members get
their curve without a band and are flagged rather than dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean, median
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyCohort

SEX_GROUPS = ("male", "female")
AGE_GROUPS = ("young", "middle", "old")
UNKNOWN = "unknown"

MEASURE_VELOCITY = "lct_velocity"
MEASURE_DISTRIBUTION = "lct_distribution"
MEASURE_LEVEL_SET = "lct_level_set"
MEASURES = (MEASURE_VELOCITY, MEASURE_DISTRIBUTION, MEASURE_LEVEL_SET)

FLAG_SINGLE = "single-participant"
FLAG_TOO_FEW = "too-few-members"


@dataclass(frozen=True)
class ParticipantMeta:
    """Demographic attributes; unknown values stay in the cohort but
    are excluded from the corresponding grouping."""

    participant_id: str
    sex: str = UNKNOWN
    age_group: str = UNKNOWN

    def __post_init__(self) -> None:
        if self.sex not in SEX_GROUPS + (UNKNOWN,):
            raise ValueError(f"unknown sex category {self.sex!r}")
        if self.age_group not in AGE_GROUPS + (UNKNOWN,):
            raise ValueError(f"unknown age group {self.age_group!r}")


def age_group_from_age(years: float) -> str:
    """Age band for a numeric age: 15-34 young, 35-54 middle, 55+ old."""
    if years >= 55:
        return "old"
    if years >= 35:
        return "middle"
    if years >= 15:
        return "young"
    return UNKNOWN


@dataclass(frozen=True)
class MeasureSummary:
    measure: str
    n: int
    mean: float
    median: float
    sd: float
    flag: str = ""


def summarize_measures(
    per_participant: Mapping[str, Mapping[str, float]]
) -> list[MeasureSummary]:
    """Mean, median and sample standard deviation per measure.

    Input maps participant id to measure values (participants may lack
    some measures, e.g. when a series was degenerate). Values arrive in
    whatever unit the caller reports, typically weeks. A measure with a
    single value gets sd 0 and a flag instead of an undefined sd.

    Raises:
        EmptyCohort: the input holds no participants at all.
    """
    if not per_participant:
        raise EmptyCohort("summary over zero participants")
    rows = []
    for measure in MEASURES:
        values = [
            float(vals[measure])
            for vals in per_participant.values()
            if measure in vals
        ]
        if not values:
            rows.append(MeasureSummary(measure, 0, float("nan"), float("nan"), float("nan"), "no-data"))
            continue
        if len(values) == 1:
            rows.append(MeasureSummary(measure, 1, values[0], values[0], 0.0, FLAG_SINGLE))
            continue
        arr = np.array(values)
        rows.append(
            MeasureSummary(
                measure,
                len(values),
                fmean(values),
                median(values),
                float(arr.std(ddof=1)),
            )
        )
    return rows


@dataclass(frozen=True)
class GroupCurve:
    """Mean level-set last crossing time along the level grid for one
    demographic group, with an optional bootstrap confidence band."""

    group: str
    alphas: tuple[float, ...]
    mean_lct: tuple[float, ...]
    ci_low: tuple[float, ...] | None
    ci_high: tuple[float, ...] | None
    n_members: int
    flag: str = ""


def group_lct_curves(
    level_lcts: Mapping[str, Mapping[float, float]],
    metas: Mapping[str, ParticipantMeta],
    alphas: Sequence[float],
    n_bootstrap: int = 1000,
    ci_level: float = 0.90,
    seed: int = 0,
) -> list[GroupCurve]:
    """Per-group mean curves with percentile-bootstrap bands.

    level_lcts maps participant id to {alpha: last crossing time}; only
    participants present in both mappings contribute. The bootstrap
    resamples participants (the same resample across all levels of a
    group), is seeded per group and therefore reproducible bit for bit.

    Raises:
        EmptyCohort: no participant has both measures and metadata.
    """
    if not 0.0 < ci_level < 1.0:
        raise ValueError("ci_level must lie strictly between 0 and 1")
    alphas = tuple(alphas)
    pids = sorted(set(level_lcts) & set(metas))
    if not pids:
        raise EmptyCohort("no participants with both measures and metadata")

    groups: list[tuple[str, list[str]]] = []
    for sex in SEX_GROUPS:
        groups.append((sex, [p for p in pids if metas[p].sex == sex]))
    for age in AGE_GROUPS:
        groups.append((age, [p for p in pids if metas[p].age_group == age]))

    lo_pct = 100.0 * (1.0 - ci_level) / 2.0
    hi_pct = 100.0 - lo_pct
    curves = []
    for group_index, (name, members) in enumerate(groups):
        if not members:
            curves.append(GroupCurve(name, alphas, (), None, None, 0, FLAG_TOO_FEW))
            continue
        matrix = np.array(
            [[float(level_lcts[p][a]) for a in alphas] for p in members]
        )
        means = tuple(float(x) for x in matrix.mean(axis=0))
        if len(members) < 2:
            curves.append(GroupCurve(name, alphas, means, None, None, len(members), FLAG_TOO_FEW))
            continue
        rng = np.random.default_rng([seed, group_index])
        idx = rng.integers(0, len(members), size=(n_bootstrap, len(members)))
        boot_means = matrix[idx].mean(axis=1)  # (n_bootstrap, n_alphas)
        ci_low = tuple(float(x) for x in np.percentile(boot_means, lo_pct, axis=0))
        ci_high = tuple(float(x) for x in np.percentile(boot_means, hi_pct, axis=0))
        curves.append(GroupCurve(name, alphas, means, ci_low, ci_high, len(members)))
    return curves
