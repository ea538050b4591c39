"""pks-plot command line.

Subcommands: ``decay`` (semilog decay curves with fitted-rate overlays) and
``compare`` (n_linf and nneq_l2 panels across runs). Exit codes: 0 figure
written, 1 error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import render_comparison_report, render_decay_plot

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with code 1, matching the runtime error path."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _cmd_decay(args) -> int:
    window = None
    if args.window is not None:
        lo, hi = (float(part) for part in args.window.split(","))
        window = (lo, hi)
    columns = [name.strip() for name in args.columns.split(",") if name.strip()]
    path = render_decay_plot(args.input, columns, fit_window=window, out=args.out)
    print(f"wrote: {path}")
    return 0


def _cmd_compare(args) -> int:
    labels = None
    if args.labels is not None:
        labels = [name.strip() for name in args.labels.split(",")]
    path = render_comparison_report(args.input, labels=labels, out=args.out)
    print(f"wrote: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pks-plot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_decay = sub.add_parser("decay", help="semilog decay curves from one records file")
    p_decay.add_argument("--input", required=True, help="path to records.csv")
    p_decay.add_argument("--out", required=True, help="output image path")
    p_decay.add_argument(
        "--columns", default="F_total", help="comma-separated column names (default F_total)"
    )
    p_decay.add_argument(
        "--window", default=None, metavar="A,B", help="fit window (default: all samples)"
    )
    p_decay.set_defaults(func=_cmd_decay)

    p_cmp = sub.add_parser("compare", help="n_linf and nneq_l2 panels across runs")
    p_cmp.add_argument(
        "--input", action="append", required=True, help="records.csv path, repeatable"
    )
    p_cmp.add_argument("--out", required=True, help="output image path")
    p_cmp.add_argument(
        "--labels", default=None, help="comma-separated curve labels (default: run directory names)"
    )
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
