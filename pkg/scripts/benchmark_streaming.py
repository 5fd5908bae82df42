"""Time the bulk lane: stream a large fix file and estimate activity.

Generates a commuter cohort of the requested size (default five
million rows), then measures the streaming read + clean + ordinary
estimator pass that the performance contract promises. Reports wall
time, throughput, and peak resident memory growth when psutil is
available.
"""

import argparse
import os
import tempfile
import time

from mobstab.activity import ordinary_estimator_arrays
from mobstab.geometry import ReferenceFrame
from mobstab.ingest import clean_block, stream_fix_blocks
from mobstab.synth import (
    SamplingScheme,
    default_grid,
    sample_times,
    two_anchor_itinerary,
    write_fixes_csv,
)
from mobstab.units import WEEK_SECONDS


def generate(path, n_participants: int, rows_each: int, frame, grid) -> int:
    def blocks():
        for k in range(n_participants):
            itin = two_anchor_itinerary(
                grid, frame, home=(1500 + k, 1500), work=(1500 + k, 1510)
            )
            t = sample_times(itin, SamplingScheme(n=rows_each), seed=900 + k)
            lon, lat = itin.positions(t)
            yield f"p{k:03d}", t, lon, lat

    return write_fixes_csv(path, blocks())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--participants", type=int, default=50)
    ap.add_argument("--rows-each", type=int, default=100_000)
    ap.add_argument("--file", default=None, help="reuse/keep the fix file here")
    args = ap.parse_args(argv)

    grid = default_grid()
    frame = ReferenceFrame(0.0, 2 * WEEK_SECONDS)
    path = args.file or os.path.join(tempfile.mkdtemp(prefix="mobstab_bench_"), "fixes.csv")

    if os.path.exists(path) and os.path.getsize(path) > 0:
        print(f"reusing {path}")
    else:
        t0 = time.monotonic()
        n = generate(path, args.participants, args.rows_each, frame, grid)
        print(f"generated {n} rows in {time.monotonic() - t0:.1f}s -> {path}")

    try:
        import psutil

        proc = psutil.Process()
        rss0 = proc.memory_info().rss
    except ImportError:
        proc = rss0 = None

    t0 = time.monotonic()
    n_rows = n_blocks = 0
    peak = rss0 or 0
    for _, t, lon, lat, _ in stream_fix_blocks(path):
        ct, _, _, rows, cols, counts = clean_block(t, lon, lat, frame, grid)
        ordinary_estimator_arrays(ct, rows, cols, frame, grid.n_cells)
        n_rows += counts["n_read"]
        n_blocks += 1
        if proc is not None:
            peak = max(peak, proc.memory_info().rss)
    elapsed = time.monotonic() - t0

    print(
        f"streamed {n_rows} rows / {n_blocks} participants in {elapsed:.1f}s "
        f"({n_rows / elapsed / 1e6:.2f}M rows/s)"
    )
    if proc is not None:
        print(f"peak rss growth {(peak - rss0) / 2**20:.0f} MiB")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
