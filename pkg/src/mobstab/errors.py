"""Exception types raised by the analysis pipeline.

Recoverable per-participant conditions (too little data, degenerate
series) share a base class so callers can flag a participant and move
on; configuration and file-format problems get their own classes so
the CLI can map them to distinct exit codes.
"""


class MobilityDataError(Exception):
    """Base class for data-dependent estimation failures."""


class TooFewFixes(MobilityDataError):
    """Trajectory has fewer fixes than the operation needs."""


class ZeroTerminalValue(MobilityDataError):
    """Relative errors are undefined because the series ends at zero."""


class EmptySequence(MobilityDataError):
    """Cell sequence contains no entries."""


class NonpositiveDensity(MobilityDataError):
    """Sampling density weights must be strictly positive."""


class NoStationaryPairs(MobilityDataError):
    """No consecutive fixes share a cell, so stationary time is unobserved."""


class FrameTooShort(MobilityDataError):
    """Observation frame is shorter than one analysis period."""


class AllPeriodsEmpty(MobilityDataError):
    """Every analysis period was empty or unestimable."""


class EmptyTerminalLevelSet(MobilityDataError):
    """The level set of the final running mean is empty."""


class EmptyCohort(MobilityDataError):
    """An aggregate was requested over zero participants."""


class MixedGamma(MobilityDataError):
    """Per-participant results were computed at different thresholds."""


class MalformedRecord(MobilityDataError):
    """A delimited-text record failed validation.

    Attributes:
        line_no: 1-based line number in the source file, header included.
        reason: short human-readable description.
    """

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class NonContiguousParticipant(MobilityDataError):
    """A participant's rows reappeared after their block ended.

    The streaming reader requires fix files grouped by participant.
    Run the ingest subcommand with a normalized output path to regroup
    an arbitrary file, or load it fully in memory with load_cohort.
    """


class ConfigError(Exception):
    """Invalid run configuration or command-line usage."""
