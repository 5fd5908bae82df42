"""Streaming ingestion of delimited GPS fix files.

Fix files are UTF-8 text with a header row and one record per line:

    participant_id,unix_time_seconds,lon,lat

Metadata files carry one row per participant:

    participant_id,sex,age_group

Comma is the default delimiter; tab is accepted and sniffed from the
header line. Records are validated field by field and a bad line
either aborts the run with its line number or, with skip_bad, is
counted and dropped.

Two reading lanes exist on purpose. stream_fix_blocks yields one
participant's raw arrays at a time and needs the file grouped by
participant, which keeps peak memory at the largest single block no
matter how long the file is. load_cohort reads everything into
memory first, so it accepts rows in any order; use it for datasets
that fit, or regroup a scrambled file once via the ingest subcommand
and stream afterwards.

Cleaning follows a fixed order per participant: sort by time, drop
duplicate timestamps (first one wins), drop fixes closer than the
jitter threshold to the last kept fix, clip to the reference frame
and grid window. Every dropped fix is counted in the report.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .cohort import AGE_GROUPS, SEX_GROUPS, UNKNOWN, ParticipantMeta
from .errors import MalformedRecord, NonContiguousParticipant
from .geometry import (
    GridSpec,
    ReferenceFrame,
    Trajectory,
    haversine_m,
    locate_cells,
)

FIX_COLUMNS = ("participant_id", "unix_time_seconds", "lon", "lat")
META_COLUMNS = ("participant_id", "sex", "age_group")

_DELIMITERS = (",", "\t")


@dataclass(frozen=True)
class ParticipantIngest:
    """Cleaning counters for one participant."""

    participant_id: str
    n_read: int
    n_duplicate_ts: int
    n_jitter_dropped: int
    n_outside_frame: int
    n_outside_window: int
    n_kept: int

    @property
    def empty_after_clip(self) -> bool:
        return self.n_kept == 0


@dataclass(frozen=True)
class IngestReport:
    """Per-participant counters plus file-level totals."""

    participants: tuple[ParticipantIngest, ...]
    n_bad_lines: int
    meta_only_ids: tuple[str, ...]

    @property
    def n_read(self) -> int:
        return sum(p.n_read for p in self.participants)

    @property
    def n_kept(self) -> int:
        return sum(p.n_kept for p in self.participants)


def _sniff_delimiter(header_line: str) -> str:
    for d in _DELIMITERS:
        if d in header_line:
            return d
    return ","


def _check_header(row: list[str], expected: tuple[str, ...]) -> None:
    got = tuple(c.strip() for c in row)
    if got != expected:
        raise MalformedRecord(1, f"header {got!r}, expected {expected!r}")


def _parse_fix_row(row: list[str], line_no: int) -> tuple[str, float, float, float]:
    if len(row) != 4:
        raise MalformedRecord(line_no, f"expected 4 fields, got {len(row)}")
    pid = row[0].strip()
    if not pid:
        raise MalformedRecord(line_no, "empty participant_id")
    try:
        t = float(row[1])
        lon = float(row[2])
        lat = float(row[3])
    except ValueError:
        raise MalformedRecord(line_no, f"non-numeric field in {row!r}") from None
    if not math.isfinite(t):
        raise MalformedRecord(line_no, f"non-finite timestamp {row[1]!r}")
    if not -180.0 <= lon <= 180.0:
        raise MalformedRecord(line_no, f"longitude {lon} outside [-180, 180]")
    if not -90.0 <= lat <= 90.0:
        raise MalformedRecord(line_no, f"latitude {lat} outside [-90, 90]")
    return pid, t, lon, lat


def stream_fix_blocks(
    path, skip_bad: bool = False
) -> Iterator[tuple[str, np.ndarray, np.ndarray, np.ndarray, int]]:
    """Yield (participant_id, t, lon, lat, n_bad_skipped) per block.

    The file must be grouped by participant (not necessarily sorted);
    a participant reappearing after their block ended raises
    NonContiguousParticipant. Peak memory is one block, however long
    the file.

    Raises:
        MalformedRecord: bad header, or bad record without skip_bad.
        NonContiguousParticipant: regrouping needed, see load_cohort.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            raise MalformedRecord(1, "empty file")
        delim = _sniff_delimiter(header_line)
        _check_header(header_line.rstrip("\r\n").split(delim), FIX_COLUMNS)

        seen: set[str] = set()
        cur: str | None = None
        ts: list[float] = []
        lons: list[float] = []
        lats: list[float] = []
        n_bad = 0

        def block():
            return (
                cur,
                np.array(ts, dtype=float),
                np.array(lons, dtype=float),
                np.array(lats, dtype=float),
                n_bad,
            )

        for line_no, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row:
                continue
            try:
                pid, t, lon, lat = _parse_fix_row(row, line_no)
            except MalformedRecord:
                if not skip_bad:
                    raise
                n_bad += 1
                continue
            if pid != cur:
                if cur is not None:
                    yield block()
                    ts, lons, lats = [], [], []
                    n_bad = 0
                if pid in seen:
                    raise NonContiguousParticipant(
                        f"{pid!r} reappears at line {line_no}"
                    )
                seen.add(pid)
                cur = pid
            ts.append(t)
            lons.append(lon)
            lats.append(lat)
        if cur is not None:
            yield block()


def clean_block(
    t: np.ndarray,
    lon: np.ndarray,
    lat: np.ndarray,
    frame: ReferenceFrame,
    grid: GridSpec,
    jitter_threshold_m: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, dict]:
    """Sort, dedup, jitter-filter and clip one participant's arrays.

    Returns (t, lon, lat, rows, cols, counts) for the kept fixes, with
    rows/cols already located on the grid. counts holds the dropped
    totals keyed like ParticipantIngest's fields.
    """
    n_read = len(t)
    order = np.argsort(t, kind="stable")
    t, lon, lat = t[order], lon[order], lat[order]

    if len(t):
        keep = np.empty(len(t), dtype=bool)
        keep[0] = True
        np.greater(t[1:], t[:-1], out=keep[1:])
        n_dup = int((~keep).sum())
        if n_dup:
            t, lon, lat = t[keep], lon[keep], lat[keep]
    else:
        n_dup = 0

    n_jit = 0
    if jitter_threshold_m > 0.0 and len(t) > 1:
        kept_idx = [0]
        last = 0
        for i in range(1, len(t)):
            if haversine_m(lon[last], lat[last], lon[i], lat[i]) < jitter_threshold_m:
                n_jit += 1
            else:
                kept_idx.append(i)
                last = i
        if n_jit:
            idx = np.array(kept_idx)
            t, lon, lat = t[idx], lon[idx], lat[idx]

    in_frame = (t >= frame.t_min) & (t <= frame.t_max)
    rows, cols, in_window = locate_cells(lon, lat, grid)
    keep = in_frame & in_window
    counts = {
        "n_read": n_read,
        "n_duplicate_ts": n_dup,
        "n_jitter_dropped": n_jit,
        "n_outside_frame": int((~in_frame).sum()),
        "n_outside_window": int((in_frame & ~in_window).sum()),
        "n_kept": int(keep.sum()),
    }
    return t[keep], lon[keep], lat[keep], rows[keep], cols[keep], counts


def read_meta(path) -> dict[str, ParticipantMeta]:
    """Read a participant metadata file.

    Empty sex/age fields become the unknown category; anything else
    must be one of the documented labels.

    Raises:
        MalformedRecord: bad header, wrong field count, or a label
            outside the documented categories.
    """
    metas: dict[str, ParticipantMeta] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            raise MalformedRecord(1, "empty file")
        delim = _sniff_delimiter(header_line)
        _check_header(header_line.rstrip("\r\n").split(delim), META_COLUMNS)
        for line_no, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MalformedRecord(line_no, f"expected 3 fields, got {len(row)}")
            pid = row[0].strip()
            if not pid:
                raise MalformedRecord(line_no, "empty participant_id")
            sex = row[1].strip() or UNKNOWN
            age = row[2].strip() or UNKNOWN
            if sex not in SEX_GROUPS + (UNKNOWN,):
                raise MalformedRecord(line_no, f"unknown sex label {sex!r}")
            if age not in AGE_GROUPS + (UNKNOWN,):
                raise MalformedRecord(line_no, f"unknown age label {age!r}")
            metas[pid] = ParticipantMeta(pid, sex, age)
    return metas


def load_cohort(
    fix_path,
    meta_path=None,
    *,
    grid: GridSpec,
    frame: ReferenceFrame,
    jitter_threshold_m: float = 0.0,
    skip_bad: bool = False,
) -> tuple[dict[str, Trajectory], dict[str, ParticipantMeta], IngestReport]:
    """Read a whole fix file into memory, rows in any order.

    Participants left empty after cleaning are reported but get no
    trajectory. Metadata is optional; participants without a row get
    unknown attributes, and metadata rows whose id never appears in
    the fix file are listed in the report instead of failing the run.
    """
    chunks: dict[str, list[list[float]]] = {}
    n_bad = 0
    with open(fix_path, newline="", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            raise MalformedRecord(1, "empty file")
        delim = _sniff_delimiter(header_line)
        _check_header(header_line.rstrip("\r\n").split(delim), FIX_COLUMNS)
        for line_no, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row:
                continue
            try:
                pid, t, lon, lat = _parse_fix_row(row, line_no)
            except MalformedRecord:
                if not skip_bad:
                    raise
                n_bad += 1
                continue
            triple = chunks.setdefault(pid, [[], [], []])
            triple[0].append(t)
            triple[1].append(lon)
            triple[2].append(lat)

    trajectories: dict[str, Trajectory] = {}
    stats: list[ParticipantIngest] = []
    for pid in sorted(chunks):
        ts, lons, lats = (np.array(x, dtype=float) for x in chunks[pid])
        t, lon, lat, _, _, counts = clean_block(
            ts, lons, lats, frame, grid, jitter_threshold_m
        )
        stats.append(ParticipantIngest(pid, **counts))
        if len(t):
            trajectories[pid] = Trajectory.from_arrays(pid, t, lon, lat)

    metas: dict[str, ParticipantMeta] = {}
    meta_only: tuple[str, ...] = ()
    if meta_path is not None:
        metas = read_meta(meta_path)
        meta_only = tuple(sorted(set(metas) - set(chunks)))
    for pid in chunks:
        if pid not in metas:
            metas[pid] = ParticipantMeta(pid)

    report = IngestReport(tuple(stats), n_bad, meta_only)
    return trajectories, metas, report


def write_normalized_fixes(path, blocks) -> int:
    """Write cleaned (pid, t, lon, lat) blocks back out, grouped.

    The output satisfies stream_fix_blocks' grouping requirement, so a
    scrambled file regrouped once can be streamed ever after. Returns
    the number of rows written.
    """
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(FIX_COLUMNS) + "\n")
        for pid, t, lon, lat in blocks:
            fh.writelines(
                f"{pid},{ti:.3f},{lo:.8f},{la:.8f}\n"
                for ti, lo, la in zip(t.tolist(), lon.tolist(), lat.tolist())
            )
            n += len(t)
    return n
