"""Command-line entry points.

Subcommands:

    ingest   validate, clean and regroup a fix file; writes
             normalized_fixes.csv and ingest_report.csv
    analyze  full run over a fix file; writes the output bundle
    synth    generate a synthetic preset cohort (fixes, metadata and a
             ready-to-run config file)
    verify   estimator convergence report over the shipped presets
    curves   recompute demographic group curves from a finished run

Every subcommand accepts --config (key=value file) and repeatable
--set KEY=VALUE overrides; the common paths also have dedicated flags.
Exit codes: 0 success, 1 configuration or verification failure, 2
unusable input data.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from collections import defaultdict

from ._version import __version__
from .cohort import ParticipantMeta, group_lct_curves
from .errors import ConfigError, MobilityDataError
from .geometry import ReferenceFrame
from .ingest import load_cohort, read_meta, write_normalized_fixes
from .pipeline import RunConfig, build_config, run_pipeline, validate_config
from .synth import (
    PRESETS,
    build_age_cohort,
    default_grid,
    sample_preset_cohort_arrays,
    verify_theorems,
    write_fixes_csv,
    write_meta_csv,
)
from .units import WEEK_SECONDS


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; route them through ConfigError
    # so usage problems share the validation exit code
    def error(self, message):
        raise ConfigError(message)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config field (repeatable)",
    )
    p.add_argument("--fixes", help="fix file (overrides fix_path)")
    p.add_argument("--meta", help="metadata file (overrides meta_path)")
    p.add_argument("--out", help="output directory (overrides out_dir)")


def _config_from(args) -> RunConfig:
    overrides: dict[str, str] = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, _, v = item.partition("=")
        overrides[k.strip()] = v.strip()
    if args.fixes:
        overrides["fix_path"] = args.fixes
    if args.meta:
        overrides["meta_path"] = args.meta
    if args.out:
        overrides["out_dir"] = args.out
    return build_config(args.config, overrides)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_ingest(args) -> int:
    cfg = _config_from(args)
    validate_config(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    trajectories, _, report = load_cohort(
        cfg.fix_path,
        cfg.meta_path or None,
        grid=cfg.grid(),
        frame=cfg.frame(),
        jitter_threshold_m=cfg.jitter_threshold_m,
        skip_bad=cfg.skip_bad,
    )
    out_fixes = os.path.join(cfg.out_dir, "normalized_fixes.csv")
    n = write_normalized_fixes(
        out_fixes,
        (
            (pid, *trajectories[pid].time_arrays())
            for pid in sorted(trajectories)
        ),
    )
    out_report = os.path.join(cfg.out_dir, "ingest_report.csv")
    with open(out_report, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            "participant_id,n_read,n_duplicate_ts,n_jitter_dropped,"
            "n_outside_frame,n_outside_window,n_kept,empty_after_clip\n"
        )
        for p in report.participants:
            fh.write(
                f"{p.participant_id},{p.n_read},{p.n_duplicate_ts},"
                f"{p.n_jitter_dropped},{p.n_outside_frame},{p.n_outside_window},"
                f"{p.n_kept},{int(p.empty_after_clip)}\n"
            )
    for pid in report.meta_only_ids:
        print(f"warning: metadata row {pid!r} has no fixes", file=sys.stderr)
    print(
        f"ingested {report.n_read} rows -> {n} kept across "
        f"{len(trajectories)} participants ({report.n_bad_lines} bad lines skipped)"
    )
    print(f"wrote {out_fixes} and {out_report}")
    return 0


def _cmd_analyze(args) -> int:
    cfg = _config_from(args)
    result = run_pipeline(cfg)
    print(
        f"analyzed {result.n_participants} participants "
        f"({result.n_flagged} flagged) -> {result.out_dir}"
    )
    return 0


def _cmd_synth(args) -> int:
    grid = default_grid()
    frame = ReferenceFrame(0.0, args.weeks * WEEK_SECONDS)
    if args.preset == "age_cohort":
        cohort = build_age_cohort(grid, frame, n_per_group=args.members, seed=args.seed)
    else:
        if args.preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {args.preset!r}; choose from "
                f"{', '.join(sorted(PRESETS))}, age_cohort"
            )
        preset = PRESETS[args.preset]
        cohort = [
            (
                f"{args.preset}{k:03d}",
                preset.build(grid, frame, args.seed * 100003 + k),
                "unknown",
                "unknown",
            )
            for k in range(args.members)
        ]
    os.makedirs(args.out, exist_ok=True)
    fixes_path = os.path.join(args.out, "fixes.csv")
    meta_path = os.path.join(args.out, "meta.csv")
    n = write_fixes_csv(
        fixes_path, sample_preset_cohort_arrays(cohort, args.n_fixes, seed=args.seed)
    )
    write_meta_csv(meta_path, ((pid, sex, age) for pid, _, sex, age in cohort))
    cfg_path = os.path.join(args.out, "run.cfg")
    with open(cfg_path, "w", encoding="utf-8") as fh:
        fh.write(
            f"fix_path={fixes_path}\n"
            f"meta_path={meta_path}\n"
            f"out_dir={os.path.join(args.out, 'run')}\n"
            f"t_min=0\n"
            f"t_max={frame.t_max!r}\n"
        )
    print(f"wrote {n} fixes for {len(cohort)} participants under {args.out}")
    print(f"next: mobstab analyze --config {cfg_path}")
    return 0


def _cmd_verify(args) -> int:
    rates = tuple(int(r) for r in args.rates.split(","))
    presets = args.presets.split(",") if args.presets else None
    report = verify_theorems(rates=rates, n_seeds=args.n_seeds, seed=args.seed, presets=presets)
    print(f"{'preset':<12} {'n':>7} {'err_ordinary':>13} {'err_conserv':>12} {'gap':>10} {'failures':>9}")
    for r in report.rows:
        print(
            f"{r.preset:<12} {r.n:>7d} {r.median_err_ordinary:>13.6f} "
            f"{r.median_err_conservative:>12.6f} {r.median_gap:>10.6f} "
            f"{r.n_conservative_failures:>9d}"
        )
    ok = True
    for name in dict.fromkeys(r.preset for r in report.rows):
        checks = {
            f: report.medians_decrease(name, f)
            for f in ("median_err_ordinary", "median_err_conservative", "median_gap")
        }
        verdict = "ok" if all(checks.values()) else "FAIL"
        ok &= all(checks.values())
        print(f"{name}: medians decrease across rates -> {verdict}")
    return 0 if ok else 1


def _cmd_curves(args) -> int:
    run_dir = args.run
    src = os.path.join(run_dir, "levelset_by_participant.csv")
    level_lcts: dict[str, dict[float, float]] = defaultdict(dict)
    try:
        with open(src, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                level_lcts[row["participant_id"]][float(row["alpha"])] = float(
                    row["lct_weeks"]
                )
    except OSError as e:
        raise ConfigError(f"cannot read {src}: {e}") from None
    except (KeyError, TypeError, ValueError):
        raise MobilityDataError(f"{src} does not match the documented schema") from None
    if not level_lcts:
        raise MobilityDataError(f"{src} holds no rows")

    metas: dict[str, ParticipantMeta] = {}
    if args.meta:
        metas = read_meta(args.meta)
    for pid in level_lcts:
        if pid not in metas:
            metas[pid] = ParticipantMeta(pid)

    alphas = sorted({a for d in level_lcts.values() for a in d})
    complete = {
        pid: d for pid, d in level_lcts.items() if all(a in d for a in alphas)
    }
    curves = group_lct_curves(
        complete,
        metas,
        alphas,
        n_bootstrap=args.n_bootstrap,
        ci_level=args.ci_level,
        seed=args.seed,
    )
    out = args.out or os.path.join(run_dir, "group_curves.csv")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        fh.write("group,alpha,n_members,mean_lct_weeks,ci_low_weeks,ci_high_weeks,flag\n")
        for c in curves:
            for i, alpha in enumerate(c.alphas):
                if i >= len(c.mean_lct):
                    break
                lo = "" if c.ci_low is None else format(c.ci_low[i], ".10g")
                hi = "" if c.ci_high is None else format(c.ci_high[i], ".10g")
                fh.write(
                    f"{c.group},{format(alpha, 'g')},{c.n_members},"
                    f"{format(c.mean_lct[i], '.10g')},{lo},{hi},{c.flag}\n"
                )
    print(f"wrote {out} ({len(curves)} groups, {len(complete)} participants)")
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="mobstab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mobstab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="clean and regroup a fix file")
    _add_config_args(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("analyze", help="run the full analysis")
    _add_config_args(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--preset", required=True, help="preset name or age_cohort")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--members", type=int, default=8, help="participants (per group for age_cohort)")
    p.add_argument("--n-fixes", type=int, default=30000, help="fixes per participant")
    p.add_argument("--weeks", type=float, default=20.0, help="frame length in weeks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("verify", help="estimator convergence report")
    p.add_argument("--rates", default="100,1000,10000", help="comma-separated sample counts")
    p.add_argument("--n-seeds", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--presets", default="", help="comma-separated preset names (default: gate presets)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("curves", help="recompute group curves from a run")
    p.add_argument("--run", required=True, help="finished run directory")
    p.add_argument("--meta", help="metadata file for group assignment")
    p.add_argument("--out", help="output csv (default: <run>/group_curves.csv)")
    p.add_argument("--n-bootstrap", type=int, default=1000)
    p.add_argument("--ci-level", type=float, default=0.90)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_curves)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except MobilityDataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
