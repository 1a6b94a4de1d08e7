"""Command-line entry point: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render figures from adosim CSV outputs")
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument("--input", required=True, help="input CSV path")
    parser.add_argument("--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(args.figure, args.input, args.output))
    except (SchemaError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
