"""Command line front end: render summary CSVs into the standard figures."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .figures import FIGURE_AXES, figure_spec, render_figure


def fixture_summary_path() -> Path:
    """The packaged example summary, used when --summary is not given."""
    return Path(str(resources.files("secrecyplots").joinpath("fixtures/summary.csv")))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render sweep summary CSVs as error-bar line figures",
    )
    parser.add_argument(
        "--summary",
        help="summary CSV path (defaults to the packaged example table)",
    )
    parser.add_argument(
        "--figure",
        choices=sorted(FIGURE_AXES),
        help="render a single figure",
    )
    parser.add_argument("--all", action="store_true", help="render all four figures")
    parser.add_argument("--out", help="output image path for --figure (default <name>.svg)")
    parser.add_argument(
        "--out-dir", default=".", help="output directory for --all (default current)"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if bool(args.figure) == args.all:
        parser.error("choose exactly one of --figure or --all")

    summary = Path(args.summary) if args.summary else fixture_summary_path()
    try:
        if args.all:
            for name in sorted(FIGURE_AXES):
                out = Path(args.out_dir) / f"{name}.svg"
                print(f"wrote {render_figure(figure_spec(name, summary, out))}")
        else:
            out = args.out if args.out else f"{args.figure}.svg"
            print(f"wrote {render_figure(figure_spec(args.figure, summary, out))}")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
