"""Command-line entry point."""

import argparse
import os
import sys

from . import __version__
from .figures import KINDS, FigureRequest, render
from .schema import FigureError


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mobfig", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="draw one figure from a run file")
    r.add_argument("--kind", required=True, choices=KINDS)
    r.add_argument("--in", dest="in_path", required=True, metavar="CSV",
                   help="run output file matching the kind")
    r.add_argument("--out", dest="out_path", required=True, metavar="IMAGE",
                   help="image path (.png or .svg)")
    r.add_argument("--participant", default=None,
                   help="velocity: participant id when the file holds several")
    r.add_argument("--gamma", type=float, default=0.2,
                   help="velocity: stability margin (default 0.2)")
    r.add_argument("--mark-alpha", type=float, default=None,
                   help="levelset/groups: draw a vertical guide at this level")
    r.add_argument("--bins", type=int, default=16, help="hist: bin count")
    r.add_argument("--title", default=None)
    r.add_argument("--x-label", default=None)
    r.add_argument("--y-label", default=None)
    r.add_argument("--dpi", type=int, default=150)
    return ap


def _cmd_render(args) -> int:
    if not os.path.exists(args.in_path):
        print(f"error: input file not found: {args.in_path}", file=sys.stderr)
        return 1
    req = FigureRequest(
        kind=args.kind,
        in_path=args.in_path,
        out_path=args.out_path,
        participant=args.participant,
        gamma=args.gamma,
        mark_alpha=args.mark_alpha,
        bins=args.bins,
        title=args.title,
        x_label=args.x_label,
        y_label=args.y_label,
        dpi=args.dpi,
    )
    manifest = render(req)
    counts = ", ".join(f"{k}={v}" for k, v in sorted(manifest["elements"].items()))
    print(f"wrote {args.out_path} ({counts})")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _cmd_render(args)
    except FigureError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
