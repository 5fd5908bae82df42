"""End-to-end runs: configuration, per-participant analysis, output bundle.

A run streams the fix file one participant at a time, computes the
average-velocity error series and the period-mean activity measures
for each, and writes a fixed set of delimited-text files plus a JSON
manifest into one output directory. Participants whose data defeats a
measure (too few fixes, no stationary pairs, a frame shorter than one
period) are flagged and skipped for that measure; the run carries on.

Output files, all with header rows, comma-delimited, LF newlines:

    participants.csv            one row per participant: fix count,
                                observation span, the three last
                                crossing times in weeks, failure flags
    velocity_series.csv         participant_id, tau_weeks,
                                velocity_km_week
    ape_series.csv              participant_id, tau_weeks, ape
    levelset_by_participant.csv participant_id, alpha, lct_weeks,
                                n_components (of the terminal level set)
    levelset_alpha.csv          cohort curve: alpha, mean/median lct,
                                mean component count, n_participants
    group_curves.csv            group, alpha, n_members, mean lct and
                                bootstrap band, flag
    summary.csv                 mean/median/sd per measure, weeks
    ingest_report.csv           per-participant cleaning counters
    manifest.json               config echo, version, totals, failures

Reruns with the same config and input are byte-identical: participants
are processed in file order, scalar tables written in sorted id order,
floats formatted with one fixed format, the bootstrap seeded from the
config, and the manifest carries no timestamps.
"""

from __future__ import annotations

import json
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from statistics import fmean, median
from typing import Iterable, Mapping, Sequence

from ._version import __version__
from .activity import CellSequence
from .cohort import (
    MEASURE_DISTRIBUTION,
    MEASURE_LEVEL_SET,
    MEASURE_VELOCITY,
    GroupCurve,
    ParticipantMeta,
    group_lct_curves,
    summarize_measures,
)
from .errors import ConfigError, MobilityDataError
from .geometry import DISTANCE_FORMULAS, GridSpec, ReferenceFrame, Trajectory
from .gridgraph import connected_components
from .ingest import ParticipantIngest, clean_block, read_meta, stream_fix_blocks
from .lct import ape_series, last_crossing_time
from .periods import (
    COUNTING_MODES,
    level_set,
    lct_distribution,
    lct_level_set,
    period_mean_series,
    ranking_distribution,
    split_periods,
)
from .units import WEEK_SECONDS, mps_to_km_per_week
from .velocity import average_velocity_series

ESTIMATOR_CHOICES = ("ordinary", "conservative")

OUTPUT_FILES = (
    "participants.csv",
    "velocity_series.csv",
    "ape_series.csv",
    "levelset_by_participant.csv",
    "levelset_alpha.csv",
    "group_curves.csv",
    "summary.csv",
    "ingest_report.csv",
    "manifest.json",
)

DEFAULT_ALPHAS = tuple(round(0.1 * k, 1) for k in range(1, 11))


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, flat so config files stay one key deep."""

    fix_path: str = ""
    meta_path: str = ""
    out_dir: str = "run_out"
    # grid window
    origin_lon: float = 8.0
    origin_lat: float = 46.5
    n_cols: int = 4000
    n_rows: int = 4000
    cell_size_m: float = 28.0
    # observation frame, epoch seconds
    t_min: float = 0.0
    t_max: float = 0.0
    # analysis
    period_length_s: float = WEEK_SECONDS
    gamma: float = 0.2
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    alpha_main: float = 0.2
    estimator: str = "ordinary"
    distance_formula: str = "haversine"
    counting: str = "data"
    jitter_threshold_m: float = 0.0
    # bootstrap
    seed: int = 0
    n_bootstrap: int = 1000
    ci_level: float = 0.90
    # execution
    n_workers: int = 1
    skip_bad: bool = False

    def grid(self) -> GridSpec:
        return GridSpec(
            self.origin_lon, self.origin_lat, self.n_cols, self.n_rows, self.cell_size_m
        )

    def frame(self) -> ReferenceFrame:
        return ReferenceFrame(self.t_min, self.t_max)


def validate_config(cfg: RunConfig) -> None:
    """Collect every problem before rejecting, so one round trip fixes all.

    Raises:
        ConfigError: any field out of range or any path missing.
    """
    problems: list[str] = []
    if not cfg.fix_path:
        problems.append("fix_path is required")
    elif not os.path.exists(cfg.fix_path):
        problems.append(f"fix_path {cfg.fix_path!r} does not exist")
    if cfg.meta_path and not os.path.exists(cfg.meta_path):
        problems.append(f"meta_path {cfg.meta_path!r} does not exist")
    if not cfg.gamma > 0.0:
        problems.append(f"gamma must be positive, got {cfg.gamma}")
    if not cfg.alphas:
        problems.append("alphas must be nonempty")
    if any(not 0.0 <= a <= 1.0 for a in cfg.alphas):
        problems.append(f"alphas must lie in [0, 1], got {cfg.alphas}")
    if not 0.0 <= cfg.alpha_main <= 1.0:
        problems.append(f"alpha_main must lie in [0, 1], got {cfg.alpha_main}")
    if not cfg.t_min < cfg.t_max:
        problems.append(f"frame [{cfg.t_min}, {cfg.t_max}] is empty")
    if not cfg.period_length_s > 0.0:
        problems.append("period_length_s must be positive")
    if cfg.estimator not in ESTIMATOR_CHOICES:
        problems.append(f"estimator must be one of {ESTIMATOR_CHOICES}, got {cfg.estimator!r}")
    if cfg.distance_formula not in DISTANCE_FORMULAS:
        problems.append(
            f"distance_formula must be one of {DISTANCE_FORMULAS}, got {cfg.distance_formula!r}"
        )
    if cfg.counting not in COUNTING_MODES:
        problems.append(f"counting must be one of {COUNTING_MODES}, got {cfg.counting!r}")
    if cfg.jitter_threshold_m < 0.0:
        problems.append("jitter_threshold_m must be nonnegative")
    if cfg.n_workers < 1:
        problems.append("n_workers must be at least 1")
    if cfg.n_bootstrap < 1:
        problems.append("n_bootstrap must be at least 1")
    if not 0.0 < cfg.ci_level < 1.0:
        problems.append("ci_level must lie strictly between 0 and 1")
    try:
        cfg.grid()
    except ValueError as e:
        problems.append(f"grid: {e}")
    if problems:
        raise ConfigError("; ".join(problems))


# ---------------------------------------------------------------------------
# config files: one key=value per line, # comments


def parse_config_text(text: str) -> dict[str, str]:
    """Parse key=value lines; later keys win.

    Raises:
        ConfigError: a non-comment line without '='.
    """
    out: dict[str, str] = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {i}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {name!r}")
    t = _FIELD_TYPES[name]
    try:
        if t == "str":
            return raw
        if t == "float":
            return float(raw)
        if t == "int":
            return int(raw)
        if t == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if t == "tuple[float, ...]":
            parts = raw.replace(",", " ").split()
            return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"config key {name!r}: cannot parse {raw!r} as {t}") from None
    raise ConfigError(f"config key {name!r} has unsupported type {t}")


def build_config(
    config_path: str | None = None, overrides: Mapping[str, str] | None = None
) -> RunConfig:
    """RunConfig from an optional file plus overriding key=value pairs."""
    values: dict[str, object] = {}
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from None
        for k, v in parse_config_text(text).items():
            values[k] = _coerce(k, v)
    for k, v in (overrides or {}).items():
        values[k] = _coerce(k, v)
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# per-participant analysis


@dataclass(frozen=True)
class ParticipantResult:
    """Everything computed for one participant.

    Series tuples hold (tau_seconds, value) pairs. Measures that failed
    are None, with the exception named in flags as "measure:ErrorType".
    """

    participant_id: str
    ingest: ParticipantIngest
    span_s: float
    velocity_samples: tuple[tuple[float, float], ...]
    ape_samples: tuple[tuple[float, float], ...]
    lct_velocity_s: float | None
    lct_distribution_periods: int | None
    level_lcts: dict[float, int]
    terminal_components: dict[float, int]
    flags: tuple[str, ...]


def analyze_participant(
    pid: str,
    t,
    lon,
    lat,
    rows,
    cols,
    counts: dict,
    cfg: RunConfig,
) -> ParticipantResult:
    """All measures for one cleaned block; failures flag, never raise."""
    frame = cfg.frame()
    grid = cfg.grid()
    ing = ParticipantIngest(pid, **counts)
    flags: list[str] = []
    vel_samples: tuple = ()
    ape_samples: tuple = ()
    lct_v: float | None = None
    lct_d: int | None = None
    level_lcts: dict[float, int] = {}
    components: dict[float, int] = {}
    span = float(t[-1] - t[0]) if len(t) else 0.0

    if ing.empty_after_clip:
        return ParticipantResult(
            pid, ing, 0.0, (), (), None, None, {}, {}, ("empty-after-clip",)
        )

    try:
        traj = Trajectory.from_arrays(pid, t, lon, lat)
        vel = average_velocity_series(traj, frame, cfg.distance_formula)
        vel_samples = vel.samples
        ape = ape_series(vel)
        ape_samples = ape.samples
        lct_v = last_crossing_time(ape, cfg.gamma).lct
    except MobilityDataError as e:
        flags.append(f"{MEASURE_VELOCITY}:{type(e).__name__}")

    series = None
    entries = tuple(
        (float(ti), (int(r), int(c)))
        for ti, r, c in zip(t.tolist(), rows.tolist(), cols.tolist())
    )
    try:
        _, period_seqs = split_periods(CellSequence(entries, frame), cfg.period_length_s)
        series = period_mean_series(
            period_seqs, estimator=cfg.estimator, n_cells_total=grid.n_cells
        )
        lct_d = lct_distribution(series, cfg.gamma, cfg.counting)
    except MobilityDataError as e:
        flags.append(f"{MEASURE_DISTRIBUTION}:{type(e).__name__}")

    if series is not None:
        terminal_ranking = ranking_distribution(series.running_means[-1])
        for alpha in sorted(set(cfg.alphas) | {cfg.alpha_main}):
            try:
                level_lcts[alpha] = lct_level_set(series, alpha, cfg.gamma, cfg.counting)
                cells = level_set(terminal_ranking, alpha).cells
                components[alpha] = connected_components(cells).n_components
            except MobilityDataError as e:
                flags.append(f"{MEASURE_LEVEL_SET}@{alpha:g}:{type(e).__name__}")
    elif lct_d is None:
        # level sets need the same series; one flag explains both
        flags.append(f"{MEASURE_LEVEL_SET}:unavailable")

    return ParticipantResult(
        pid,
        ing,
        span,
        vel_samples,
        ape_samples,
        lct_v,
        lct_d,
        level_lcts,
        components,
        tuple(flags),
    )


def _analyze_raw_block(args) -> ParticipantResult:
    """Worker entry: clean then analyze. Top-level for pickling."""
    pid, t, lon, lat, cfg = args
    cleaned = clean_block(t, lon, lat, cfg.frame(), cfg.grid(), cfg.jitter_threshold_m)
    return analyze_participant(pid, *cleaned, cfg)


# ---------------------------------------------------------------------------
# output writers


def _g(x: float) -> str:
    return format(float(x), ".10g")


def _weeks(seconds: float) -> float:
    return seconds / WEEK_SECONDS


def _period_weeks(n_periods: int, cfg: RunConfig) -> float:
    return n_periods * cfg.period_length_s / WEEK_SECONDS


class _SeriesWriters:
    """Incremental writers for the long per-fix files.

    Rows go out as each participant finishes, in file order, so memory
    never holds more than one participant's series.
    """

    def __init__(self, out_dir: str):
        self.vel = open(
            os.path.join(out_dir, "velocity_series.csv"), "w", newline="", encoding="utf-8"
        )
        self.ape = open(
            os.path.join(out_dir, "ape_series.csv"), "w", newline="", encoding="utf-8"
        )
        self.vel.write("participant_id,tau_weeks,velocity_km_week\n")
        self.ape.write("participant_id,tau_weeks,ape\n")

    def add(self, r: ParticipantResult) -> None:
        # velocities are m/s internally, km/week on the way out
        self.vel.writelines(
            f"{r.participant_id},{_g(_weeks(tau))},{_g(mps_to_km_per_week(v))}\n"
            for tau, v in r.velocity_samples
        )
        self.ape.writelines(
            f"{r.participant_id},{_g(_weeks(tau))},{_g(v)}\n" for tau, v in r.ape_samples
        )

    def close(self) -> None:
        self.vel.close()
        self.ape.close()


def _strip_series(r: ParticipantResult) -> ParticipantResult:
    return replace(r, velocity_samples=(), ape_samples=())


def _write_participants(out_dir: str, results: Mapping[str, ParticipantResult], cfg: RunConfig) -> None:
    path = os.path.join(out_dir, "participants.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            "participant_id,n_kept,span_weeks,"
            "lct_velocity_weeks,lct_distribution_weeks,lct_level_set_weeks,flags\n"
        )
        for pid in sorted(results):
            r = results[pid]
            v = "" if r.lct_velocity_s is None else _g(_weeks(r.lct_velocity_s))
            d = (
                ""
                if r.lct_distribution_periods is None
                else _g(_period_weeks(r.lct_distribution_periods, cfg))
            )
            ls = r.level_lcts.get(cfg.alpha_main)
            s = "" if ls is None else _g(_period_weeks(ls, cfg))
            fh.write(
                f"{pid},{r.ingest.n_kept},{_g(_weeks(r.span_s))},"
                f"{v},{d},{s},{';'.join(r.flags)}\n"
            )


def _write_levelset_files(
    out_dir: str, results: Mapping[str, ParticipantResult], cfg: RunConfig
) -> None:
    by_p = os.path.join(out_dir, "levelset_by_participant.csv")
    with open(by_p, "w", newline="", encoding="utf-8") as fh:
        fh.write("participant_id,alpha,lct_weeks,n_components\n")
        for pid in sorted(results):
            r = results[pid]
            for alpha in sorted(r.level_lcts):
                fh.write(
                    f"{pid},{format(alpha, 'g')},"
                    f"{_g(_period_weeks(r.level_lcts[alpha], cfg))},"
                    f"{r.terminal_components[alpha]}\n"
                )

    curve = os.path.join(out_dir, "levelset_alpha.csv")
    with open(curve, "w", newline="", encoding="utf-8") as fh:
        fh.write("alpha,mean_lct_weeks,median_lct_weeks,mean_components,n_participants\n")
        for alpha in cfg.alphas:
            vals = [
                _period_weeks(r.level_lcts[alpha], cfg)
                for r in results.values()
                if alpha in r.level_lcts
            ]
            comps = [
                float(r.terminal_components[alpha])
                for r in results.values()
                if alpha in r.terminal_components
            ]
            if not vals:
                fh.write(f"{format(alpha, 'g')},,,,0\n")
                continue
            fh.write(
                f"{format(alpha, 'g')},{_g(fmean(vals))},{_g(median(vals))},"
                f"{_g(fmean(comps))},{len(vals)}\n"
            )


def _measure_table(
    results: Mapping[str, ParticipantResult], cfg: RunConfig
) -> dict[str, dict[str, float]]:
    table: dict[str, dict[str, float]] = {}
    for pid, r in results.items():
        row: dict[str, float] = {}
        if r.lct_velocity_s is not None:
            row[MEASURE_VELOCITY] = _weeks(r.lct_velocity_s)
        if r.lct_distribution_periods is not None:
            row[MEASURE_DISTRIBUTION] = _period_weeks(r.lct_distribution_periods, cfg)
        ls = r.level_lcts.get(cfg.alpha_main)
        if ls is not None:
            row[MEASURE_LEVEL_SET] = _period_weeks(ls, cfg)
        if row:
            table[pid] = row
    return table


def _write_summary(out_dir: str, table: Mapping[str, Mapping[str, float]]) -> None:
    path = os.path.join(out_dir, "summary.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("measure,n,mean_weeks,median_weeks,sd_weeks,flag\n")
        if not table:
            return
        for row in summarize_measures(table):
            mean = "" if row.mean != row.mean else _g(row.mean)
            med = "" if row.median != row.median else _g(row.median)
            sd = "" if row.sd != row.sd else _g(row.sd)
            fh.write(f"{row.measure},{row.n},{mean},{med},{sd},{row.flag}\n")


def _write_group_curves(out_dir: str, curves: Sequence[GroupCurve]) -> None:
    path = os.path.join(out_dir, "group_curves.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("group,alpha,n_members,mean_lct_weeks,ci_low_weeks,ci_high_weeks,flag\n")
        for c in curves:
            for i, alpha in enumerate(c.alphas):
                if i >= len(c.mean_lct):
                    break
                lo = "" if c.ci_low is None else _g(c.ci_low[i])
                hi = "" if c.ci_high is None else _g(c.ci_high[i])
                fh.write(
                    f"{c.group},{format(alpha, 'g')},{c.n_members},"
                    f"{_g(c.mean_lct[i])},{lo},{hi},{c.flag}\n"
                )


def _write_ingest_report(out_dir: str, results: Mapping[str, ParticipantResult]) -> None:
    path = os.path.join(out_dir, "ingest_report.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            "participant_id,n_read,n_duplicate_ts,n_jitter_dropped,"
            "n_outside_frame,n_outside_window,n_kept,empty_after_clip\n"
        )
        for pid in sorted(results):
            g = results[pid].ingest
            fh.write(
                f"{pid},{g.n_read},{g.n_duplicate_ts},{g.n_jitter_dropped},"
                f"{g.n_outside_frame},{g.n_outside_window},{g.n_kept},"
                f"{int(g.empty_after_clip)}\n"
            )


# ---------------------------------------------------------------------------
# the run itself


@dataclass(frozen=True)
class RunResult:
    out_dir: str
    n_participants: int
    n_flagged: int
    files: tuple[str, ...]


def _iter_results(cfg: RunConfig) -> Iterable[tuple[ParticipantResult, int]]:
    """Yield (result, n_bad_lines) in file order, pool or not.

    With workers, a bounded window of futures keeps memory at
    O(window x block) while preserving file order for the writers.
    """
    blocks = stream_fix_blocks(cfg.fix_path, cfg.skip_bad)
    if cfg.n_workers <= 1:
        for pid, t, lon, lat, n_bad in blocks:
            yield _analyze_raw_block((pid, t, lon, lat, cfg)), n_bad
        return
    window = 2 * cfg.n_workers
    with ProcessPoolExecutor(max_workers=cfg.n_workers) as pool:
        pending: deque = deque()
        for pid, t, lon, lat, n_bad in blocks:
            pending.append((pool.submit(_analyze_raw_block, (pid, t, lon, lat, cfg)), n_bad))
            if len(pending) >= window:
                fut, nb = pending.popleft()
                yield fut.result(), nb
        while pending:
            fut, nb = pending.popleft()
            yield fut.result(), nb


def run_pipeline(cfg: RunConfig) -> RunResult:
    """Execute a full run; see the module docstring for the bundle.

    Raises:
        ConfigError: invalid configuration.
        MalformedRecord, NonContiguousParticipant: unusable input file.
    """
    validate_config(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)

    metas: dict[str, ParticipantMeta] = {}
    if cfg.meta_path:
        metas = read_meta(cfg.meta_path)

    results: dict[str, ParticipantResult] = {}
    n_bad_total = 0
    writers = _SeriesWriters(cfg.out_dir)
    try:
        for result, n_bad in _iter_results(cfg):
            n_bad_total += n_bad
            writers.add(result)
            results[result.participant_id] = _strip_series(result)
    finally:
        writers.close()

    meta_only = tuple(sorted(set(metas) - set(results)))
    for pid in results:
        if pid not in metas:
            metas[pid] = ParticipantMeta(pid)

    _write_participants(cfg.out_dir, results, cfg)
    _write_levelset_files(cfg.out_dir, results, cfg)
    table = _measure_table(results, cfg)
    _write_summary(cfg.out_dir, table)

    level_weeks: dict[str, dict[float, float]] = {
        pid: {a: _period_weeks(r.level_lcts[a], cfg) for a in cfg.alphas}
        for pid, r in results.items()
        if all(a in r.level_lcts for a in cfg.alphas)
    }
    curves: list[GroupCurve] = []
    if level_weeks:
        curves = group_lct_curves(
            level_weeks,
            metas,
            cfg.alphas,
            n_bootstrap=cfg.n_bootstrap,
            ci_level=cfg.ci_level,
            seed=cfg.seed,
        )
    _write_group_curves(cfg.out_dir, curves)
    _write_ingest_report(cfg.out_dir, results)

    failures = {pid: list(r.flags) for pid, r in sorted(results.items()) if r.flags}
    manifest = {
        "version": __version__,
        "config": {**asdict(cfg), "alphas": list(cfg.alphas)},
        "totals": {
            "n_participants": len(results),
            "n_flagged": len(failures),
            "n_read": sum(r.ingest.n_read for r in results.values()),
            "n_kept": sum(r.ingest.n_kept for r in results.values()),
            "n_bad_lines": n_bad_total,
        },
        "failures": failures,
        "groups": {
            c.group: {"n_members": c.n_members, "flag": c.flag} for c in curves
        },
        "meta_only_ids": list(meta_only),
        "files": sorted(OUTPUT_FILES),
    }
    with open(os.path.join(cfg.out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")

    return RunResult(
        out_dir=cfg.out_dir,
        n_participants=len(results),
        n_flagged=len(failures),
        files=OUTPUT_FILES,
    )
