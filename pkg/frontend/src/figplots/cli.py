"""Command-line entry point: figplot --spec spec.json --out fig.png."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import SpecError, load_spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figplot", description="Render a simulator CSV/JSON output into a figure."
    )
    parser.add_argument("--spec", required=True, help="figure spec JSON file")
    parser.add_argument("--out", required=True, help="output image path (.png)")
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args.spec)
        render(spec, args.out)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
