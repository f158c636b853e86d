"""Batch figure generation from metrics CSV globs."""

from __future__ import annotations

import argparse
import glob
import sys

from .figures import FigureSpec, PlotError, plot


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit",
                                     description="loss/grad-norm curves with mean +- std bands")
    parser.add_argument("--csv", required=True, nargs="+",
                        help="input CSV paths or globs")
    parser.add_argument("--x", default="t", choices=("t", "Z", "B"))
    parser.add_argument("--y", default="loss", choices=("loss", "grad_norm"))
    parser.add_argument("--group-by", default="algo",
                        help="comma list of grouping columns")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default=None)
    parser.add_argument("--linear-y", action="store_true", help="linear y axis")
    args = parser.parse_args(argv)

    paths = []
    for pattern in args.csv:
        hits = sorted(glob.glob(pattern))
        paths.extend(hits if hits else [pattern])
    try:
        spec = FigureSpec(x=args.x, y=args.y,
                          group_by=tuple(c.strip() for c in args.group_by.split(",") if c.strip()),
                          out=args.out, title=args.title, log_y=not args.linear_y)
        curves = plot(paths, spec)
    except (PlotError, OSError) as exc:
        print(f"plotkit error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({len(curves)} curves)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
