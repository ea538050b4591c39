"""Command-line driver.

Subcommands: ``run`` (config file), ``scenario`` (named preset), ``sweep``
(parameter study), ``fit-rate`` (exponential fit on a records.csv column).
Exit codes: 0 run completed, 2 blow-up detected (the expected outcome of
blow-up scenarios), 1 error or aborted run. Config values can also be set via
environment variables with the ``PKS_`` prefix and ``__`` as the section
separator, e.g. ``PKS_MODEL__A=20000``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import harness

__all__ = ["main", "build_parser"]

_STATUS_CODES = {"completed": 0, "blowup_detected": 2, "aborted": 1}


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with code 1; code 2 is reserved for blow-up outcomes."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _parse_overrides(pairs: list[str]) -> dict:
    out: dict = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"override {pair!r} is not of the form path=value")
        path, raw = pair.split("=", 1)
        harness._set_path(out, path.strip(), harness._parse_scalar(raw.strip()))
    return out


def _print_outcome(outcome, outdir: str | None) -> None:
    last = outcome.records[-1] if outcome.records else None
    print(f"status: {outcome.status}")
    print(f"t_final: {outcome.final_state.t:.6g}")
    print(f"records: {len(outcome.records)}")
    if last is not None:
        print(f"mass: {last.mass:.12g}  n_linf: {last.n_linf:.6g}  F_total: {last.F_total:.6g}")
    if outdir is not None:
        print(f"wrote: {outdir}")


def _cmd_run(args) -> int:
    cfg = harness.load_config(args.config)
    outdir = args.outdir or cfg["output"]["directory"]
    outcome = harness.run_from_config(cfg, mode=args.mode, outdir=outdir)
    _print_outcome(outcome, outdir)
    return _STATUS_CODES[outcome.status]


def _cmd_scenario(args) -> int:
    overrides = _parse_overrides(args.set or [])
    outdir = args.outdir or os.path.join("out", args.name)
    outcome = harness.run_scenario(args.name, overrides, outdir=outdir)
    _print_outcome(outcome, outdir)
    return _STATUS_CODES[outcome.status]


def _cmd_sweep(args) -> int:
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    overrides = _parse_overrides(args.set or [])
    outdir = args.outdir or os.path.join("out", "sweep")
    table = harness.sweep(
        args.param, values, scenario=args.scenario, overrides=overrides,
        outdir=outdir, fit_column=args.fit_column,
    )
    print(f"param: {table['param']}  fit_column: {table['fit_column']}")
    for row in table["rows"]:
        print(
            f"  value={row['value']:g}  status={row['status']}  "
            f"rate={row['rate']:.6g}  r2={row['r_squared']:.4g}"
        )
    if table["slope"] is not None and math.isfinite(table["slope"]):
        print(f"slope: {table['slope']:.6g}")
    print(f"wrote: {outdir}")
    return 0


def _cmd_fit_rate(args) -> int:
    from .hypo import fit_decay_rate

    columns, data = harness.read_records(args.input)
    if args.column not in columns:
        raise ValueError(f"column {args.column!r} not found; available columns: {', '.join(columns)}")
    window = None
    if args.window is not None:
        lo, hi = (float(part) for part in args.window.split(","))
        window = (lo, hi)
    fit = fit_decay_rate(data[:, 0], data[:, columns.index(args.column)], window=window)
    print(f"rate: {fit.rate:.12g}")
    print(f"r_squared: {fit.r_squared:.6g}")
    print(f"n_samples: {fit.n_samples}")
    print(f"window: {fit.window[0]:.6g},{fit.window[1]:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pks-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run from a YAML config file")
    p_run.add_argument("--config", required=True, help="path to the YAML config")
    p_run.add_argument("--outdir", default=None, help="output directory (default: output.directory)")
    p_run.add_argument("--mode", choices=("pks", "passive_scalar"), default="pks")
    p_run.set_defaults(func=_cmd_run)

    p_sc = sub.add_parser("scenario", help="run a named preset")
    p_sc.add_argument("name", choices=harness.SCENARIO_NAMES)
    p_sc.add_argument("--set", action="append", metavar="PATH=VALUE",
                      help="config override, repeatable (e.g. --set model.A=2e4)")
    p_sc.add_argument("--outdir", default=None, help="output directory (default: out/<name>)")
    p_sc.set_defaults(func=_cmd_scenario)

    p_sw = sub.add_parser("sweep", help="run a scenario across parameter values")
    p_sw.add_argument("--param", required=True, help="dotted config path (e.g. model.A)")
    p_sw.add_argument("--values", required=True, help="comma-separated values (model.A accepts 0 = flow off)")
    p_sw.add_argument("--scenario", default="passive_scalar_ed", choices=harness.SCENARIO_NAMES)
    p_sw.add_argument("--set", action="append", metavar="PATH=VALUE", help="config override, repeatable")
    p_sw.add_argument("--fit-column", default=None, help="records column to rate-fit (default mode-dependent)")
    p_sw.add_argument("--outdir", default=None, help="output directory (default: out/sweep)")
    p_sw.set_defaults(func=_cmd_sweep)

    p_fit = sub.add_parser("fit-rate", help="exponential decay fit on a records.csv column")
    p_fit.add_argument("--input", required=True, help="path to records.csv")
    p_fit.add_argument("--column", required=True, help="column name to fit")
    p_fit.add_argument("--window", default=None, metavar="A,B", help="time window (default: all samples)")
    p_fit.set_defaults(func=_cmd_fit_rate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
