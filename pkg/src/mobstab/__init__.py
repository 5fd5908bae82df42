"""Temporal stability of human mobility from GPS fixes.

The library quantifies how long a person's mobility statistics keep
changing before settling: last crossing times of the average-velocity
process, of per-period grid-cell activity distributions, and of the
level sets of their ranking distribution. A synthetic-itinerary
module with analytically known ground truth backs the estimator
guarantees, and a streaming pipeline turns fix files into delimited
outputs ready for plotting.
"""

from ._version import __version__
from .activity import (
    ActivityDistribution,
    CellSequence,
    SamplingDensity,
    cell_sequence,
    conservative_estimator,
    estimate_density_weights,
    l1_distance,
    naive_estimator,
    ordinary_estimator,
    ordinary_estimator_arrays,
    weighted_estimator,
)
from .cohort import (
    GroupCurve,
    MeasureSummary,
    ParticipantMeta,
    age_group_from_age,
    group_lct_curves,
    summarize_measures,
)
from .errors import (
    AllPeriodsEmpty,
    ConfigError,
    EmptyCohort,
    EmptySequence,
    EmptyTerminalLevelSet,
    FrameTooShort,
    MalformedRecord,
    MixedGamma,
    MobilityDataError,
    NoStationaryPairs,
    NonContiguousParticipant,
    NonpositiveDensity,
    TooFewFixes,
    ZeroTerminalValue,
)
from .geometry import (
    Cell,
    ClipStats,
    GpsFix,
    GridSpec,
    ReferenceFrame,
    Trajectory,
    cell_center,
    clip_to_window,
    great_circle_distance,
    haversine_m,
    locate_cells,
    map_to_cell,
    vincenty_m,
)
from .gridgraph import ComponentLabeling, connected_components
from .ingest import (
    IngestReport,
    ParticipantIngest,
    clean_block,
    load_cohort,
    read_meta,
    stream_fix_blocks,
)
from .lct import (
    ApeSeries,
    LctResult,
    ape_series,
    last_crossing_time,
    lct_mape,
    mape,
    mean_lct,
    weekly_ticks,
)
from .periods import (
    LevelSet,
    MeanActivitySeries,
    PeriodPartition,
    RankingDistribution,
    lct_distribution,
    lct_level_set,
    level_set,
    period_mean_series,
    ranking_distribution,
    split_periods,
)
from .pipeline import RunConfig, RunResult, build_config, run_pipeline, validate_config
from .synth import (
    PRESETS,
    PiecewiseItinerary,
    SamplingScheme,
    build_age_cohort,
    ground_truth_distribution,
    sample_fixes,
    verify_theorems,
)
from .units import WEEK_SECONDS, seconds_to_weeks, weeks_to_seconds
from .velocity import ScalarProcessSeries, average_velocity_series, path_length
