"""Command line for batch figure rendering."""

from __future__ import annotations

import argparse
import sys

from swarmplots.render import KINDS, PlotSpec, SchemaError, render


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmform-plot",
        description="Render figures from swarmform run logs",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="in_dir", required=True, help="run log directory")
    parser.add_argument("--out", required=True, help="output image path (png)")
    parser.add_argument("--time", type=float, default=None,
                        help="snapshot time in seconds (default: last record)")
    parser.add_argument("--compare", default=None,
                        help="second run directory overlaid in c1c4_plane")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    spec = PlotSpec(in_dir=args.in_dir, kind=args.kind, out_path=args.out,
                    time=args.time, compare_dir=args.compare)
    try:
        render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
