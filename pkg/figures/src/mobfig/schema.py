"""Column contracts for the run files this package knows how to draw.

The analysis pipeline documents its output schemas; these readers hold
that contract and fail with the offending column named, so a drifted
producer is diagnosed from the error alone.
"""

import csv
from dataclasses import dataclass


class FigureError(Exception):
    """Base for everything the renderer can refuse to draw."""


class SchemaMismatch(FigureError):
    """Input file does not match the documented run-output schema."""


class EmptyInput(FigureError):
    """Input parses but holds no drawable rows."""


@dataclass(frozen=True)
class TableSpec:
    """Required columns and how to coerce them.

    numeric columns must parse as float; optional_numeric columns may
    also be empty, which reads as None (the pipeline leaves cells
    blank where a statistic is undefined). Extra columns in the file
    are ignored, so the producer may grow its schema.
    """

    name: str
    columns: tuple
    numeric: tuple = ()
    optional_numeric: tuple = ()


VELOCITY_SERIES = TableSpec(
    name="velocity series",
    columns=("participant_id", "tau_weeks", "velocity_km_week"),
    numeric=("tau_weeks", "velocity_km_week"),
)

LEVELSET_ALPHA = TableSpec(
    name="level-set cohort curve",
    columns=(
        "alpha",
        "mean_lct_weeks",
        "median_lct_weeks",
        "mean_components",
        "n_participants",
    ),
    numeric=("alpha", "n_participants"),
    optional_numeric=("mean_lct_weeks", "median_lct_weeks", "mean_components"),
)

GROUP_CURVES = TableSpec(
    name="group curves",
    columns=(
        "group",
        "alpha",
        "n_members",
        "mean_lct_weeks",
        "ci_low_weeks",
        "ci_high_weeks",
        "flag",
    ),
    numeric=("alpha", "n_members"),
    optional_numeric=("mean_lct_weeks", "ci_low_weeks", "ci_high_weeks"),
)

PARTICIPANTS = TableSpec(
    name="participant table",
    columns=(
        "participant_id",
        "n_kept",
        "span_weeks",
        "lct_velocity_weeks",
        "lct_distribution_weeks",
        "lct_level_set_weeks",
        "flags",
    ),
    numeric=("n_kept", "span_weeks"),
    optional_numeric=(
        "lct_velocity_weeks",
        "lct_distribution_weeks",
        "lct_level_set_weeks",
    ),
)


def read_table(path, spec: TableSpec) -> list[dict]:
    """Read one run file into row dicts, coerced per the spec.

    Raises:
        SchemaMismatch: missing column, or an unparseable value, with
            the column (and line) named.
        EmptyInput: header is fine but there are no data rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file, expected a {spec.name} header")
        missing = [c for c in spec.columns if c not in header]
        if missing:
            raise SchemaMismatch(
                f"{path}: {spec.name} is missing column {missing[0]!r} "
                f"(header has {', '.join(header)})"
            )
        idx = {c: header.index(c) for c in spec.columns}

        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) < len(header):
                raise SchemaMismatch(
                    f"{path} line {lineno}: {len(raw)} fields, expected {len(header)}"
                )
            row = {}
            for col in spec.columns:
                value = raw[idx[col]]
                if col in spec.numeric or col in spec.optional_numeric:
                    if value == "" and col in spec.optional_numeric:
                        row[col] = None
                        continue
                    try:
                        row[col] = float(value)
                    except ValueError:
                        raise SchemaMismatch(
                            f"{path} line {lineno}: column {col!r} "
                            f"has non-numeric value {value!r}"
                        )
                else:
                    row[col] = value
            rows.append(row)

    if not rows:
        raise EmptyInput(f"{path}: no data rows under the {spec.name} header")
    return rows
