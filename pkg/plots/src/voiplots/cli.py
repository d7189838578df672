"""plot-voi: render selection bars and error CDFs from simulator CSVs."""

from __future__ import annotations

import argparse
import sys

from .render import PlotJob, SchemaError, render_all


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-voi",
        description="Render sensor-selection bars and error-CDF figures from "
                    "a voisched output directory")
    parser.add_argument("--in", dest="input_dir", required=True, metavar="DIR",
                        help="directory containing selection.csv and cdf.csv")
    parser.add_argument("--out", dest="output_dir", required=True, metavar="DIR")
    parser.add_argument("--format", choices=("svg", "png"), default="svg")
    parser.add_argument("--policies", nargs="+", metavar="NAME",
                        help="restrict to these policies")
    parser.add_argument("--statistics", nargs="+", metavar="NAME",
                        help="restrict the CDF figures to these statistics")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(input_dir=args.input_dir, output_dir=args.output_dir,
                  fmt=args.format, policies=args.policies,
                  statistics=args.statistics)
    try:
        paths = render_all(job)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
