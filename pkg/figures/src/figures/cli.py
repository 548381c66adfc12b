"""Command line entry point: figures render --spec fig.json"""

from __future__ import annotations

import argparse
import sys

from figures.render import render
from figures.spec import SpecError, load_spec
from figures.table import TableError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="figures", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    sub.required = True
    p_render = sub.add_parser("render", help="render one figure from a JSON spec")
    p_render.add_argument(
        "--spec", required=True, nargs="+", help="figure spec JSON file(s)"
    )
    args = parser.parse_args(argv)

    status = 0
    for spec_path in args.spec:
        try:
            spec = load_spec(spec_path)
        except SpecError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        try:
            render(spec)
        except TableError as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = 1
            continue
        print(f"wrote {spec.output}")
    return status


if __name__ == "__main__":
    sys.exit(main())
