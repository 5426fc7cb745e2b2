"""render_decay --csv PATH --summary PATH --out PATH [--linear]"""

from __future__ import annotations

import argparse
import sys

from .render import PlotJob, SchemaError, render_decay


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="render_decay",
        description="Render an energy-decay figure from simulator outputs",
    )
    p.add_argument("--csv", required=True, help="trajectory CSV")
    p.add_argument("--summary", required=True, help="run summary JSON")
    p.add_argument("--out", required=True, help="output image (.svg default, .png works)")
    p.add_argument("--linear", action="store_true", help="linear instead of log energy axis")
    p.add_argument(
        "--components", default="E_total",
        help="comma-separated CSV columns to draw (default E_total)",
    )
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(
        csv_path=args.csv,
        summary_path=args.summary,
        out_path=args.out,
        log_scale=not args.linear,
        components=tuple(c.strip() for c in args.components.split(",") if c.strip()),
    )
    try:
        out = render_decay(job)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"render_decay: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
