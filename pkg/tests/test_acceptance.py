"""Acceptance gate: the shipped behaviors this package promises.

Each test prints one PASS/FAIL line (visible with -s or -rA) and then
asserts, so a red gate names exactly which promise broke. Tolerances
are pinned here and nowhere else; loosening them is a contract change,
not a bug fix.
"""

import json
import math
import time
from collections import deque

import numpy as np
import pytest

from mobstab.activity import (
    ActivityDistribution,
    CellSequence,
    conservative_estimator,
    l1_distance,
    ordinary_estimator,
    ordinary_estimator_arrays,
)
from mobstab.geometry import ReferenceFrame
from mobstab.gridgraph import connected_components
from mobstab.ingest import clean_block, stream_fix_blocks
from mobstab.periods import (
    lct_distribution,
    lct_level_set,
    level_set,
    period_mean_series,
    ranking_distribution,
    split_periods,
)
from mobstab.pipeline import OUTPUT_FILES, RunConfig, run_pipeline
from mobstab.synth import (
    SamplingScheme,
    age_variant_kwargs,
    default_grid,
    drifting_itinerary,
    sample_cell_sequence,
    sample_times,
    two_anchor_itinerary,
    verify_theorems,
    write_fixes_csv,
    write_meta_csv,
)
from mobstab.units import WEEK_SECONDS

GRID = default_grid()
ALPHAS = tuple(round(0.1 * k, 1) for k in range(1, 11))
GAMMA = 0.2

# pinned gate tolerances
THEOREM2_L1_AT_1E4 = 0.02
THEOREM1_GAP_AT_1E4 = 0.05
CONVERGENCE_BUDGET_S = 120.0
STREAMING_BUDGET_S = 60.0
STREAMING_RSS_BUDGET_B = 500 * 2**20
HAND_FIXTURE_ATOL = 1e-12
ORDERING_MIN_SEEDS = 18  # of 20


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {num:02d} {name}: {detail}")


@pytest.fixture(scope="module")
def convergence():
    t0 = time.monotonic()
    report = verify_theorems(rates=(100, 1000, 10000), n_seeds=50, seed=0)
    return report, time.monotonic() - t0


def test_01_ordinary_estimator_converges_to_truth(convergence):
    report, elapsed = convergence
    presets = sorted({r.preset for r in report.rows})
    finals = {p: report.preset_rows(p)[-1].median_err_ordinary for p in presets}
    decreasing = {p: report.medians_decrease(p, "median_err_ordinary") for p in presets}
    ok = (
        elapsed <= CONVERGENCE_BUDGET_S
        and all(decreasing.values())
        and all(err <= THEOREM2_L1_AT_1E4 for err in finals.values())
    )
    worst = max(finals, key=finals.get)
    _report(
        1,
        "ordinary estimator converges on every preset",
        ok,
        f"worst median L1 at n=1e4: {finals[worst]:.5f} ({worst}), "
        f"{elapsed:.1f}s of {CONVERGENCE_BUDGET_S:.0f}s budget",
    )
    assert elapsed <= CONVERGENCE_BUDGET_S
    assert decreasing == {p: True for p in presets}
    assert all(err <= THEOREM2_L1_AT_1E4 for err in finals.values()), finals


def test_02_estimators_agree_at_high_rates(convergence):
    report, _ = convergence
    presets = sorted({r.preset for r in report.rows})
    finals = {p: report.preset_rows(p)[-1].median_gap for p in presets}
    decreasing = {p: report.medians_decrease(p, "median_gap") for p in presets}
    ok = all(decreasing.values()) and all(g <= THEOREM1_GAP_AT_1E4 for g in finals.values())
    worst = max(finals, key=finals.get)
    _report(
        2,
        "ordinary and conservative estimators agree",
        ok,
        f"worst median gap at n=1e4: {finals[worst]:.5f} ({worst})",
    )
    assert decreasing == {p: True for p in presets}
    assert all(g <= THEOREM1_GAP_AT_1E4 for g in finals.values()), finals


@pytest.fixture(scope="module")
def random_rankings():
    rng = np.random.default_rng(424242)
    dists = []
    for _ in range(1000):
        support = rng.integers(1, 201)
        cells = rng.choice(GRID.n_rows * GRID.n_cols, size=support, replace=False)
        mass = rng.exponential(1.0, size=support)
        mass /= mass.sum()
        dist = ActivityDistribution(
            mass={
                (int(c) // GRID.n_cols, int(c) % GRID.n_cols): float(m)
                for c, m in zip(cells, mass)
            },
            n_cells_total=GRID.n_cells,
        )
        dists.append((dist, ranking_distribution(dist)))
    return dists


def test_03_level_sets_cover_their_share(random_rankings):
    failures = 0
    n_checks = 0
    for dist, ranking in random_rankings:
        for alpha in ALPHAS:
            cells = level_set(ranking, alpha).cells
            covered = math.fsum(dist.mass[c] for c in cells)
            n_checks += 1
            if not covered >= 1.0 - alpha:
                failures += 1
    ok = failures == 0
    _report(
        3,
        "level sets cover at least their mass share",
        ok,
        f"{n_checks - failures}/{n_checks} draws x levels hold with no tolerance",
    )
    assert failures == 0


def test_04_level_sets_nest_and_stabilize(random_rankings):
    nest_failures = 0
    for _, ranking in random_rankings:
        sets = [level_set(ranking, a).cells for a in ALPHAS]
        for wider, tighter in zip(sets, sets[1:]):
            if not tighter <= wider:
                nest_failures += 1

    frame = ReferenceFrame(0.0, 20 * WEEK_SECONDS)
    curves = []
    for s in range(20):
        itin = drifting_itinerary(GRID, frame, seed=1000 + s)
        seq = sample_cell_sequence(itin, GRID, SamplingScheme(n=30_000), 5000 + s)
        _, seqs = split_periods(seq, WEEK_SECONDS)
        series = period_mean_series(seqs, estimator="ordinary", n_cells_total=GRID.n_cells)
        curves.append([lct_level_set(series, a, GAMMA) for a in ALPHAS])
    med = np.median(np.array(curves), axis=0)
    monotone = bool(np.all(med[1:] <= med[:-1]))

    ok = nest_failures == 0 and monotone
    _report(
        4,
        "level sets nest and their LCT falls with the level",
        ok,
        f"nesting exact on 1000 draws; drifting median curve "
        f"{'non-increasing' if monotone else 'NOT monotone'}: "
        + " ".join(f"{v:g}" for v in med),
    )
    assert nest_failures == 0
    assert monotone


def test_05_regular_commuter_is_immediately_stable():
    frame = ReferenceFrame(0.0, 20 * WEEK_SECONDS)
    itin = two_anchor_itinerary(GRID, frame)
    seq = sample_cell_sequence(itin, GRID, SamplingScheme(n=50_000), seed=0)
    _, seqs = split_periods(seq, WEEK_SECONDS)
    series = period_mean_series(seqs, estimator="ordinary", n_cells_total=GRID.n_cells)
    lct_d = lct_distribution(series, GAMMA)
    lct_ls = lct_level_set(series, alpha=0.2, gamma=GAMMA)
    ok = lct_d == 0 and lct_ls == 0
    _report(
        5,
        "densely sampled commuter shows zero instability",
        ok,
        f"lct_distribution={lct_d}, lct_level_set={lct_ls} (both must be 0)",
    )
    assert lct_d == 0
    assert lct_ls == 0


def test_06_hand_worked_estimator_fixtures():
    unit = ReferenceFrame(0.0, 1.0)
    seq = CellSequence(entries=((0.25, "A"), (0.5, "A"), (0.75, "B")), frame=unit)
    est = ordinary_estimator(seq)
    err_o = max(
        abs(est.mass["A"] - 2.0 / 3.0), abs(est.mass["B"] - 1.0 / 3.0)
    )
    pair = CellSequence(entries=((0.2, "A"), (0.4, "A")), frame=unit)
    est_c = conservative_estimator(pair)
    err_c = abs(est_c.mass["A"] - 1.0)
    ok = err_o <= HAND_FIXTURE_ATOL and err_c <= HAND_FIXTURE_ATOL and set(est.mass) == {"A", "B"}
    _report(
        6,
        "hand-worked fixtures reproduced exactly",
        ok,
        f"ordinary off by {err_o:.2e}, conservative off by {err_c:.2e} "
        f"(allowed {HAND_FIXTURE_ATOL:.0e})",
    )
    assert err_o <= HAND_FIXTURE_ATOL
    assert err_c <= HAND_FIXTURE_ATOL


def _flood_fill(cells):
    remaining = set(cells)
    comps = []
    while remaining:
        comp = set()
        queue = deque([remaining.pop()])
        while queue:
            r, c = queue.popleft()
            comp.add((r, c))
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    nb = (r + dr, c + dc)
                    if nb in remaining:
                        remaining.discard(nb)
                        queue.append(nb)
        comps.append(frozenset(comp))
    return set(comps)


def test_07_components_match_brute_force():
    rng = np.random.default_rng(31337)
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(1, 101))
        side = int(rng.integers(2, 16))
        cells = {
            (int(r), int(c))
            for r, c in zip(rng.integers(0, side, n), rng.integers(0, side, n))
        }
        lab = connected_components(cells)
        expected = _flood_fill(cells)
        groups = {}
        for cell, cid in lab.label.items():
            groups.setdefault(cid, set()).add(cell)
        if set(map(frozenset, groups.values())) != expected or lab.n_components != len(expected):
            mismatches += 1
    ok = mismatches == 0
    _report(
        7,
        "component labeling matches flood fill",
        ok,
        f"{1000 - mismatches}/1000 random cell sets agree",
    )
    assert mismatches == 0


def test_08_age_groups_order_by_mobility_novelty():
    frame = ReferenceFrame(0.0, 20 * WEEK_SECONDS)
    a_idx = [i for i, a in enumerate(ALPHAS) if a <= 0.5]
    n_seeds, n_per_group = 20, 8
    ok_seeds = 0
    for s in range(n_seeds):
        means = {}
        for gi, age in enumerate(("young", "middle", "old")):
            curves = []
            for k in range(n_per_group):
                itin = drifting_itinerary(
                    GRID,
                    frame,
                    seed=s * 100003 + gi * 101 + k,
                    **age_variant_kwargs(age),
                )
                seq = sample_cell_sequence(
                    itin, GRID, SamplingScheme(n=30_000), s * 7919 + gi * 37 + k
                )
                _, seqs = split_periods(seq, WEEK_SECONDS)
                series = period_mean_series(
                    seqs, estimator="ordinary", n_cells_total=GRID.n_cells
                )
                curves.append([lct_level_set(series, a, GAMMA) for a in ALPHAS])
            means[age] = np.array(curves, dtype=float).mean(axis=0)
        if all(
            means["old"][i] < means["middle"][i] < means["young"][i] for i in a_idx
        ):
            ok_seeds += 1
    ok = ok_seeds >= ORDERING_MIN_SEEDS
    _report(
        8,
        "stability curves order old < middle < young",
        ok,
        f"strict ordering at every level <= 0.5 in {ok_seeds}/{n_seeds} seeds "
        f"(need >= {ORDERING_MIN_SEEDS})",
    )
    assert ok_seeds >= ORDERING_MIN_SEEDS


@pytest.fixture(scope="module")
def big_fix_file(tmp_path_factory):
    """5e6 rows: 50 commuters with 1e5 fixes each over two weeks."""
    root = tmp_path_factory.mktemp("bulk")
    path = root / "bulk_fixes.csv"
    frame = ReferenceFrame(0.0, 2 * WEEK_SECONDS)

    def blocks():
        for k in range(50):
            itin = two_anchor_itinerary(
                GRID, frame, home=(1500 + k, 1500), work=(1500 + k, 1510)
            )
            t = sample_times(itin, SamplingScheme(n=100_000), seed=900 + k)
            lon, lat = itin.positions(t)
            yield f"p{k:03d}", t, lon, lat

    n = write_fixes_csv(path, blocks())
    return path, n, frame


def test_09_streaming_pass_within_budget(big_fix_file):
    psutil = pytest.importorskip("psutil")
    path, n_written, frame = big_fix_file
    proc = psutil.Process()
    base_rss = proc.memory_info().rss
    peak_rss = base_rss
    t0 = time.monotonic()
    n_rows = 0
    n_participants = 0
    for pid, t, lon, lat, _ in stream_fix_blocks(path):
        ct, _, _, rows, cols, counts = clean_block(t, lon, lat, frame, GRID)
        est = ordinary_estimator_arrays(ct, rows, cols, frame, GRID.n_cells)
        assert abs(sum(est.mass.values()) - 1.0) < 1e-9
        n_rows += counts["n_read"]
        n_participants += 1
        peak_rss = max(peak_rss, proc.memory_info().rss)
    elapsed = time.monotonic() - t0
    rss_growth = peak_rss - base_rss
    ok = (
        n_rows == n_written == 5_000_000
        and elapsed <= STREAMING_BUDGET_S
        and rss_growth <= STREAMING_RSS_BUDGET_B
    )
    _report(
        9,
        "five million fixes stream within budget",
        ok,
        f"{n_rows} rows, {n_participants} participants in {elapsed:.1f}s "
        f"(budget {STREAMING_BUDGET_S:.0f}s), rss +{rss_growth / 2**20:.0f} MiB "
        f"(budget {STREAMING_RSS_BUDGET_B / 2**20:.0f} MiB)",
    )
    assert n_rows == n_written == 5_000_000
    assert elapsed <= STREAMING_BUDGET_S
    assert rss_growth <= STREAMING_RSS_BUDGET_B


def test_10_pipeline_runs_are_byte_identical(tmp_path):
    frame = ReferenceFrame(0.0, 2 * WEEK_SECONDS)
    members = [
        ("c0", two_anchor_itinerary(GRID, frame), "female", "middle"),
        ("d0", drifting_itinerary(GRID, frame, seed=21), "male", "young"),
        ("d1", drifting_itinerary(GRID, frame, seed=22), "female", "old"),
        ("d2", drifting_itinerary(GRID, frame, seed=23), "male", "old"),
    ]
    fixes, meta = tmp_path / "fixes.csv", tmp_path / "meta.csv"

    def blocks():
        for i, (pid, itin, _, _) in enumerate(members):
            t = sample_times(itin, SamplingScheme(n=1500), seed=300 + i)
            yield pid, t, *itin.positions(t)

    write_fixes_csv(fixes, blocks())
    write_meta_csv(meta, [(pid, sex, age) for pid, _, sex, age in members])
    cfg = RunConfig(
        fix_path=str(fixes),
        meta_path=str(meta),
        out_dir=str(tmp_path / "run"),
        t_min=0.0,
        t_max=2 * WEEK_SECONDS,
        n_workers=2,
    )
    run_pipeline(cfg)
    first = {
        name: (tmp_path / "run" / name).read_bytes() for name in OUTPUT_FILES
    }
    run_pipeline(cfg)
    second = {
        name: (tmp_path / "run" / name).read_bytes() for name in OUTPUT_FILES
    }
    differing = sorted(name for name in OUTPUT_FILES if first[name] != second[name])
    ok = not differing
    manifest = json.loads(second["manifest.json"])
    _report(
        10,
        "pipeline output is byte-reproducible",
        ok,
        f"{len(OUTPUT_FILES)} files identical across two runs "
        f"({manifest['totals']['n_participants']} participants)"
        if ok
        else f"files differ: {', '.join(differing)}",
    )
    assert not differing
