"""Command line: plot --csv <path> --kind <es_comparison|mdrq_bounds> --out <path.png>"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotError, PlotSpec, render


def run_cli(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render a figure from a simulation CSV."
    )
    parser.add_argument("--csv", required=True, help="input CSV path")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path (.png)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        render(PlotSpec(args.csv, args.kind, args.out))
    except (PlotError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
