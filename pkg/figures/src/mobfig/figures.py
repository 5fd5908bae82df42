"""The four figure kinds and the element manifest they publish.

Each renderer draws one figure from one run file and reports what it
drew as a flat element-count manifest, written next to the image as
<image>.elements.json. The manifest is the testable surface: a test
(or a reviewer) asserts "exactly one crossing marker" against it
instead of poking around a rasterized plot.

Rendering is deterministic: Agg backend, bundled fonts, fixed hash
salt for SVG ids, and pinned image metadata, so re-rendering a run
reproduces the bytes.
"""

import json
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import (
    GROUP_CURVES,
    LEVELSET_ALPHA,
    PARTICIPANTS,
    VELOCITY_SERIES,
    EmptyInput,
    FigureError,
    read_table,
)

KINDS = ("velocity", "levelset", "groups", "hist")

IMAGE_FORMATS = (".png", ".svg")

_STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "mobfig",
    "figure.figsize": (6.4, 4.0),
}


@dataclass(frozen=True)
class FigureRequest:
    """One figure: what to read, what to draw, where to put it."""

    kind: str
    in_path: str
    out_path: str
    participant: str | None = None  # velocity: required when the file holds several
    gamma: float = 0.2  # velocity: relative stability margin
    mark_alpha: float | None = None  # levelset/groups: vertical guide at this level
    bins: int = 16  # hist
    title: str | None = None
    x_label: str | None = None
    y_label: str | None = None
    dpi: int = 150

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.mark_alpha is not None and not 0 < self.mark_alpha <= 1:
            raise ValueError(f"mark_alpha must be in (0, 1], got {self.mark_alpha}")
        if self.bins < 1:
            raise ValueError(f"bins must be at least 1, got {self.bins}")
        if self.dpi < 1:
            raise ValueError(f"dpi must be positive, got {self.dpi}")
        ext = os.path.splitext(str(self.out_path))[1].lower()
        if ext not in IMAGE_FORMATS:
            raise ValueError(
                f"unsupported image format {ext or '(none)'!r}; use one of "
                f"{', '.join(IMAGE_FORMATS)}"
            )


def render(req: FigureRequest) -> dict:
    """Draw the requested figure and write image + element manifest.

    Returns the manifest dict. Inputs are never modified; rendering
    the same request twice produces identical files.

    Raises:
        SchemaMismatch / EmptyInput: input refused, nothing written.
        FigureError: drawable schema but undrawable values.
    """
    with plt.rc_context(_STYLE):
        fig, elements, extras = _BUILDERS[req.kind](req)
        try:
            _save(fig, req)
        finally:
            plt.close(fig)
    manifest = {
        "kind": req.kind,
        "input": str(req.in_path),
        "image": os.path.basename(str(req.out_path)),
        "elements": elements,
        **extras,
    }
    with open(f"{req.out_path}.elements.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _save(fig, req: FigureRequest) -> None:
    ext = os.path.splitext(str(req.out_path))[1].lower()
    if ext == ".png":
        # pin the Software text chunk; the default embeds the library version
        metadata = {"Software": "mobfig"}
    else:
        # the SVG writer stamps the render date unless told not to
        metadata = {"Date": None}
    fig.savefig(req.out_path, dpi=req.dpi, metadata=metadata)


def _finish(ax, req: FigureRequest, title: str, x_label: str, y_label: str) -> None:
    ax.set_title(req.title if req.title is not None else title)
    ax.set_xlabel(req.x_label if req.x_label is not None else x_label)
    ax.set_ylabel(req.y_label if req.y_label is not None else y_label)


# ---------------------------------------------------------------------------
# velocity: one participant's average-velocity trace with stability band


def _build_velocity(req: FigureRequest):
    rows = read_table(req.in_path, VELOCITY_SERIES)
    ids = list(dict.fromkeys(r["participant_id"] for r in rows))
    if req.participant is not None:
        pid = req.participant
        if pid not in ids:
            raise EmptyInput(
                f"{req.in_path}: no rows for participant {pid!r} "
                f"(file has {', '.join(ids[:8])}{'...' if len(ids) > 8 else ''})"
            )
    elif len(ids) == 1:
        pid = ids[0]
    else:
        raise ValueError(
            f"{req.in_path} holds {len(ids)} participants; pass --participant "
            f"({', '.join(ids[:8])}{'...' if len(ids) > 8 else ''})"
        )

    pts = sorted(
        (r["tau_weeks"], r["velocity_km_week"]) for r in rows if r["participant_id"] == pid
    )
    tau = np.array([p[0] for p in pts])
    vel = np.array([p[1] for p in pts])
    terminal = float(vel[-1])
    if not terminal > 0:
        raise FigureError(
            f"{req.in_path}: participant {pid!r} has zero terminal velocity; "
            "the relative stability band is undefined"
        )

    outside = np.abs(vel - terminal) > req.gamma * terminal
    lct_weeks = float(tau[outside].max()) if outside.any() else 0.0

    fig, ax = plt.subplots(constrained_layout=True)
    ax.plot(tau, vel, color="C0", lw=1.2, label="running average velocity")
    ax.axhline(terminal, ls="--", color="C3", lw=1.0, label="terminal value")
    band_label = f"terminal value ± {req.gamma:g}"
    ax.axhline(terminal * (1 + req.gamma), ls=":", color="C3", lw=1.0, label=band_label)
    ax.axhline(terminal * (1 - req.gamma), ls=":", color="C3", lw=1.0)
    if outside.any():
        ax.plot(
            tau[outside],
            vel[outside],
            ls="none",
            marker="x",
            ms=4,
            color="0.45",
            label="outside the band",
        )
    ax.plot(
        [lct_weeks],
        [terminal],
        ls="none",
        marker="v",
        ms=11,
        color="C1",
        zorder=5,
        label="last crossing",
    )
    ax.legend(loc="best", fontsize=8)
    _finish(ax, req, f"participant {pid}", "weeks observed", "average velocity (km/week)")

    elements = {
        "series_line": 1,
        "terminal_dashed": 1,
        "gamma_bounds_dotted": 2,
        "crossing_marks": int(outside.sum()),
        "lct_marker": 1,
    }
    extras = {
        "participant": pid,
        "gamma": req.gamma,
        "lct_weeks": lct_weeks,
        "terminal_km_week": terminal,
        "n_samples": len(pts),
    }
    return fig, elements, extras


# ---------------------------------------------------------------------------
# levelset: cohort crossing-time curve over levels, with component counts


def _build_levelset(req: FigureRequest):
    rows = read_table(req.in_path, LEVELSET_ALPHA)
    drawable = sorted(
        (r for r in rows if r["n_participants"] > 0 and r["mean_lct_weeks"] is not None),
        key=lambda r: r["alpha"],
    )
    if not drawable:
        raise EmptyInput(f"{req.in_path}: every level row is empty (no participants)")

    alphas = [r["alpha"] for r in drawable]
    fig, ax = plt.subplots(constrained_layout=True)
    ax2 = ax.twinx()
    bars = ax2.bar(
        alphas,
        [r["mean_components"] for r in drawable],
        width=0.06,
        color="0.85",
        label="terminal components (mean)",
    )
    # keep the curves in front of the twin's bars
    ax.set_zorder(ax2.get_zorder() + 1)
    ax.patch.set_visible(False)
    ax2.grid(False)
    ax.plot(
        alphas,
        [r["mean_lct_weeks"] for r in drawable],
        marker="o",
        color="C0",
        label="mean last crossing",
    )
    ax.plot(
        alphas,
        [r["median_lct_weeks"] for r in drawable],
        marker="s",
        ls="--",
        color="C2",
        label="median last crossing",
    )
    guide = 0
    if req.mark_alpha is not None:
        ax.axvline(req.mark_alpha, ls=":", color="0.3", lw=1.0)
        guide = 1
    handles, labels = ax.get_legend_handles_labels()
    ax.legend(handles + [bars], labels + ["terminal components (mean)"], fontsize=8)
    ax2.set_ylabel("terminal components (mean)")
    _finish(ax, req, "stability by coverage level", "level", "last crossing time (weeks)")

    elements = {
        "curve_lines": 2,
        "component_bars": len(drawable),
        "alpha_guide": guide,
    }
    extras = {
        "n_levels": len(drawable),
        "n_participants": max(int(r["n_participants"]) for r in drawable),
    }
    return fig, elements, extras


# ---------------------------------------------------------------------------
# groups: demographic mean curves with bootstrap ribbons


def _build_groups(req: FigureRequest):
    rows = read_table(req.in_path, GROUP_CURVES)
    by_group: dict[str, list[dict]] = {}
    for r in rows:
        by_group.setdefault(r["group"], []).append(r)

    fig, ax = plt.subplots(constrained_layout=True)
    n_lines = n_ribbons = 0
    drawn, skipped = [], []
    for gi, (group, grows) in enumerate(by_group.items()):
        pts = sorted(
            (r for r in grows if r["mean_lct_weeks"] is not None),
            key=lambda r: r["alpha"],
        )
        if not pts:
            skipped.append(group)
            continue
        color = f"C{gi % 10}"
        alphas = [r["alpha"] for r in pts]
        n_members = int(pts[0]["n_members"])
        ax.plot(
            alphas,
            [r["mean_lct_weeks"] for r in pts],
            marker="o",
            ms=3,
            color=color,
            label=f"{group} (n={n_members})",
        )
        n_lines += 1
        banded = [r for r in pts if r["ci_low_weeks"] is not None and r["ci_high_weeks"] is not None]
        if banded:
            ax.fill_between(
                [r["alpha"] for r in banded],
                [r["ci_low_weeks"] for r in banded],
                [r["ci_high_weeks"] for r in banded],
                color=color,
                alpha=0.18,
                lw=0,
            )
            n_ribbons += 1
        drawn.append(group)
    if n_lines == 0:
        raise EmptyInput(f"{req.in_path}: no group has a drawable curve")

    guide = 0
    if req.mark_alpha is not None:
        ax.axvline(req.mark_alpha, ls=":", color="0.3", lw=1.0)
        guide = 1
    ax.legend(fontsize=8)
    _finish(ax, req, "group stability curves", "level", "mean last crossing time (weeks)")

    elements = {
        "group_lines": n_lines,
        "ci_ribbons": n_ribbons,
        "alpha_guide": guide,
    }
    extras = {"groups": drawn, "groups_skipped": skipped}
    return fig, elements, extras


# ---------------------------------------------------------------------------
# hist: how long participants were observed


def _build_hist(req: FigureRequest):
    rows = read_table(req.in_path, PARTICIPANTS)
    spans = np.array([r["span_weeks"] for r in rows])
    counts, edges = np.histogram(spans, bins=req.bins)

    fig, ax = plt.subplots(constrained_layout=True)
    ax.bar(
        edges[:-1],
        counts,
        width=np.diff(edges),
        align="edge",
        color="C0",
        edgecolor="white",
    )
    _finish(ax, req, "observation spans", "span (weeks)", "participants")

    elements = {"bars": len(counts)}
    extras = {
        "n_participants": len(spans),
        "span_weeks_min": float(spans.min()),
        "span_weeks_max": float(spans.max()),
    }
    return fig, elements, extras


_BUILDERS = {
    "velocity": _build_velocity,
    "levelset": _build_levelset,
    "groups": _build_groups,
    "hist": _build_hist,
}
