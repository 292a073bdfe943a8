"""Command line entry: `trapnls-plot plot <figure_spec.json>`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import SchemaError, parse_figure_spec, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="trapnls-plot", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    p_plot = sub.add_parser("plot", help="render one figure from a JSON spec")
    p_plot.add_argument("spec")
    args = ap.parse_args(argv)
    try:
        spec = parse_figure_spec(Path(args.spec).read_text())
        out = render(spec)
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
