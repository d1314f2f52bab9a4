"""plotkit command line: `plotkit <kind> --in CSV [CSV ...] --out PNG`."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render penningmd CSV outputs into figures"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        path = render(FigureSpec(kind=args.kind, inputs=args.inputs,
                                 output=args.out, title=args.title))
    except SchemaError as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
