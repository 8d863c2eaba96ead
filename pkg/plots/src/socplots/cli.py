"""plots command line: render soclab CSV outputs to image files.

Exit codes: 0 rendered, 1 schema mismatch (column diff printed), 2 usage or
file errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureJob, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description="Render soclab figures from CSV.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--figure", type=int, required=True, help="figure id 1..6")
    p.add_argument("--in", dest="input_csv", required=True)
    p.add_argument("--out", dest="output_image", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = FigureJob(
            input_csv=Path(args.input_csv),
            figure_id=args.figure,
            output_image=Path(args.output_image),
        )
        out = render(job)
    except SchemaError as exc:
        print(f"schema mismatch: missing={exc.missing} unexpected={exc.unexpected}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
