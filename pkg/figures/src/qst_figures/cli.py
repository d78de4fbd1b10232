"""Command-line entry point.

    qst-figures plot --scenario fig2|fig4|fig5|fig6 --in <dir> --out <dir>

Reads the scenario's CSVs from the input directory by naming convention
and writes ``<scenario>.png`` to the output directory.  Exit codes:
0 success, 2 malformed or missing input.
"""

import argparse
import sys

from .csvio import SchemaError
from .render import FigureSpec, SCENARIOS, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qst-figures",
        description="Regenerate scenario figures from simulator CSV output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render one scenario's figure")
    plot.add_argument("--scenario", required=True, choices=SCENARIOS)
    plot.add_argument("--in", dest="in_dir", required=True,
                      help="directory holding the scenario's CSV files")
    plot.add_argument("--out", dest="out_dir", required=True,
                      help="directory for the output image")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec.discover(args.scenario, args.in_dir, args.out_dir)
        meta = render(spec)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    detail = f"{meta['panels']} panel(s)"
    if "cells" in meta:
        detail += f", {meta['cells']} cells"
    print(f"wrote {meta['image']} ({detail}, {meta['width']}x{meta['height']} px)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
