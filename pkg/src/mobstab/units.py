"""Time and unit constants.

All internal computation runs in seconds and meters; weeks and
km/week appear only at reporting boundaries.
"""

from __future__ import annotations

MINUTE_SECONDS = 60.0
HOUR_SECONDS = 3600.0
DAY_SECONDS = 86400.0
WEEK_SECONDS = 604800.0


def seconds_to_weeks(seconds: float) -> float:
    return seconds / WEEK_SECONDS


def weeks_to_seconds(weeks: float) -> float:
    return weeks * WEEK_SECONDS


def mps_to_km_per_week(mps: float) -> float:
    """Convert meters/second to kilometers/week (factor 604.8)."""
    return mps * WEEK_SECONDS / 1000.0
