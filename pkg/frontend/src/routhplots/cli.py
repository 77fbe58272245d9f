"""Command line entry: plot <kind> --in <csv> --out <png>."""

import argparse
import sys

from .figures import KINDS, PlotSpec, render, save
from .io import SchemaError


def build_parser():
    parser = argparse.ArgumentParser(prog="plot")
    parser.add_argument("kind", choices=list(KINDS))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(kind=args.kind, inputs=tuple(args.inputs),
                        output=args.out)
        save(render(spec), args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
