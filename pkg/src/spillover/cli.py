"""Command-line front end: one subcommand per analysis operation plus ``run``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .connectedness import connectedness_report, dynamic_report, export_network
from .correlation import static_correlation, var_conditional_correlation, var_partial_correlation
from .diagnostics import adf_test, chow_test, describe, engle_granger, jarque_bera, ljung_box_squared, stars
from .errors import DataError, NumericalError
from .panel import TRANSFORM_KINDS, first_difference
from .pipeline import (EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, InputSpec, PipelineConfig,
                       load_inputs, run_pipeline)
from .tvp import TvpConfig, rolling_var_fevd, trajectory_fevd, tvp_filter
from .var import FevdTable, cholesky_fevd, fit_var, gfevd, select_lag


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# shared input/output helpers


def _add_input(p, required=True):
    g = p.add_argument_group("input")
    g.add_argument("--input", "-i", action="append", required=required, metavar="CSV",
                   help="input CSV (repeat to merge files on common dates)")
    g.add_argument("--date-column", default="date")
    g.add_argument("--columns", help="comma-separated subset of columns to keep")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--transform", choices=TRANSFORM_KINDS, default="identity",
                   help="transform applied to every column after merging")
    g.add_argument("--difference", action="store_true",
                   help="take first differences after the transform")


def _add_output(p):
    p.add_argument("--output", "-o", metavar="PATH", help="output file (default: stdout)")


def _panel(args):
    cols = tuple(c.strip() for c in args.columns.split(",")) if args.columns else None
    specs = []
    for path in args.input:
        if not Path(path).is_file():
            raise DataError(f"input file not found: {path}")
        specs.append(InputSpec(path, args.date_column, cols, args.delimiter))
    panel = load_inputs(specs, {"default": args.transform})
    return first_difference(panel) if args.difference else panel


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _num(x, decimals=None) -> str:
    x = float(x)
    if np.isnan(x):
        return ""
    return repr(x) if decimals is None else f"{x:.{decimals}f}"


def _record(res, args) -> dict:
    return res.to_dict(with_stars=getattr(args, "stars", False))


def _json_text(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _lag(args, panel) -> int:
    if args.lag is not None:
        return args.lag
    return select_lag(panel, args.p_max, args.criterion)


def _add_lag(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lag", type=int, help="VAR lag order")
    g.add_argument("--p-max", type=int, default=5, help="BIC/AIC search bound when --lag is absent")
    p.add_argument("--criterion", choices=("bic", "aic"), default="bic")


def _names(text):
    return [s.strip() for s in text.split(",") if s.strip()]


# ---------------------------------------------------------------------------
# subcommands


def cmd_describe(args):
    panel = _panel(args)
    d = args.decimals
    head = ["variable", "mean", "median", "sd", "skewness", "kurtosis", "q1", "q3", "nobs"]
    if args.with_tests:
        head += ["jb", "jb_p", f"q2({args.lb_lags})", "q2_p"]
    rows = [head]
    for i, (n, s) in enumerate(describe(panel).items()):
        row = [n, *(_num(v, d) for v in (s.mean, s.median, s.sd, s.skewness, s.kurtosis, s.q1, s.q3)),
               str(s.nobs)]
        if args.with_tests:
            jb = jarque_bera(panel.values[:, i])
            lb = ljung_box_squared(panel.values[:, i], args.lb_lags)
            row += [_num(jb.statistic, d) + (stars(jb.p_value) if args.stars else ""),
                    _num(jb.p_value, d),
                    _num(lb.statistic, d) + (stars(lb.p_value) if args.stars else ""),
                    _num(lb.p_value, d)]
        rows.append(row)
    _emit(args, _csv_text(rows))


def cmd_test_adf(args):
    panel = _panel(args)
    out = []
    for i, n in enumerate(panel.names):
        r = adf_test(panel.values[:, i], args.max_lags, args.deterministic,
                     autolag=None if args.fixed_lags else "aic", level=args.level)
        out.append({"variable": n, **_record(r, args)})
    _emit(args, _json_text(out))


def cmd_test_coint(args):
    panel = _panel(args)
    if args.pair:
        pairs = [tuple(_names(args.pair))]
        if len(pairs[0]) != 2:
            raise UsageError("--pair needs exactly two comma-separated names")
    else:
        n = panel.names
        pairs = [(n[i], n[j]) for i in range(len(n)) for j in range(i + 1, len(n))]
    out = []
    for a, b in pairs:
        orders = [(a, b), (b, a)] if args.bidirectional else [(a, b)]
        for x, y in orders:
            r = engle_granger(panel.column(x), panel.column(y), args.deterministic, args.max_lags,
                              level=args.level)
            out.append({"dependent": x, "regressor": y, **_record(r, args)})
    _emit(args, _json_text(out))


def cmd_test_chow(args):
    panel = _panel(args)
    r = chow_test(panel, _lag(args, panel), args.break_index, args.variant, args.reps, args.seed,
                  level=args.level)
    _emit(args, _json_text(_record(r, args)))


def cmd_corr(args):
    panel = _panel(args)
    if args.kind in ("pearson", "spearman", "kendall"):
        m = static_correlation(panel, args.kind)
    else:
        model = fit_var(panel, _lag(args, panel))
        m = (var_conditional_correlation if args.kind == "var-conditional"
             else var_partial_correlation)(model)
    if args.format == "json":
        _emit(args, _json_text(m.to_dict(args.upper)))
    else:
        _emit(args, _csv_text(m.rows(args.upper, args.decimals)))


def fevd_rows(fevd: FevdTable):
    rows = [["", *fevd.names]]
    rows += [[n, *(repr(float(v)) for v in fevd.table[i])] for i, n in enumerate(fevd.names)]
    return rows


def read_fevd_csv(path) -> FevdTable:
    """Read a square decomposition table (header row and column of names)."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except FileNotFoundError:
        raise DataError(f"FEVD file not found: {path}") from None
    names = rows[0][1:]
    if [r[0] for r in rows[1:]] != names:
        raise DataError(f"{path}: row labels must match the header")
    try:
        shares = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    return FevdTable.from_shares(shares, names)


def _static_fevd(args, panel):
    model = fit_var(panel, _lag(args, panel))
    if args.cholesky:
        return cholesky_fevd(model, args.horizon, _names(args.cholesky))
    return gfevd(model, args.horizon)


def cmd_static_conn(args):
    panel = _panel(args)
    fevd = _static_fevd(args, panel)
    if args.fevd_out:
        Path(args.fevd_out).write_text(_csv_text(fevd_rows(fevd)))
    _emit(args, _csv_text(connectedness_report(fevd).table_rows(args.decimals)))


def cmd_dynamic_conn(args):
    panel = _panel(args)
    p = _lag(args, panel)
    if args.rolling:
        tables = rolling_var_fevd(panel, args.rolling, p, args.horizon, n_jobs=args.n_jobs)
    else:
        cfg = TvpConfig(p=p, kappa1=args.kappa1, kappa2=args.kappa2, prior_scale=args.prior_scale,
                        burn_in=args.burn_in)
        tables = trajectory_fevd(tvp_filter(panel, cfg), args.horizon, n_jobs=args.n_jobs)
    dyn = dynamic_report(tables)
    if args.pair:
        pair = _names(args.pair)
        if len(pair) != 2:
            raise UsageError("--pair needs exactly two comma-separated names")
        vals = dyn.pair_series(pair[0], pair[1], args.measure)
        if args.measure == "npdc" and args.npdc_raw:
            vals = -vals
        rows = [["date", args.measure]] + [[str(d), _num(v)] for d, v in zip(dyn.dates, vals)]
        _emit(args, _csv_text(rows))
    elif args.node:
        measure = args.measure if args.measure not in ("npdc", "pci", "pii") else "net"
        vals = dyn.series(measure, args.node)
        rows = [["date", measure]] + [[str(d), _num(v)] for d, v in zip(dyn.dates, vals)]
        _emit(args, _csv_text(rows))
    else:
        rows = dyn.long_rows()
        if args.npdc_raw:
            rows = [r if r[1] != "npdc" or i == 0 else [*r[:4], _num(-float(r[4]))]
                    for i, r in enumerate(rows)]
        _emit(args, _csv_text(rows))


def cmd_export_net(args):
    if args.fevd:
        fevd = read_fevd_csv(args.fevd)
    elif args.input:
        fevd = _static_fevd(args, _panel(args))
    else:
        raise UsageError("export-net needs --fevd or --input")
    _emit(args, export_network(connectedness_report(fevd), args.threshold))


def cmd_run(args):
    cfg = PipelineConfig.load(args.config)
    if args.n_jobs is not None:
        cfg = replace(cfg, n_jobs=args.n_jobs)
    if args.output_dir is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=args.output_dir))
    res = run_pipeline(cfg)
    if res.status != EXIT_OK:
        print(f"spillover: {res.message}", file=sys.stderr)
    print(res.directory)
    return res.status


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spillover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("describe", help="descriptive statistics per column")
    _add_input(p)
    _add_output(p)
    p.add_argument("--with-tests", action="store_true", help="add Jarque-Bera and Ljung-Box columns")
    p.add_argument("--lb-lags", type=int, default=20)
    p.add_argument("--decimals", type=int)
    p.add_argument("--stars", action="store_true")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("test-adf", help="augmented Dickey-Fuller test per column")
    _add_input(p)
    _add_output(p)
    p.add_argument("--max-lags", type=int)
    p.add_argument("--fixed-lags", action="store_true", help="use --max-lags without selection")
    p.add_argument("--deterministic", default="c", choices=("c", "ct", "n"))
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--stars", action="store_true")
    p.set_defaults(func=cmd_test_adf)

    p = sub.add_parser("test-coint", help="pairwise Engle-Granger cointegration tests")
    _add_input(p)
    _add_output(p)
    p.add_argument("--pair", help="X,Y: regress X on Y (default: every pair, upper triangle)")
    p.add_argument("--bidirectional", action="store_true", help="also run each reversed ordering")
    p.add_argument("--max-lags", type=int)
    p.add_argument("--deterministic", default="c", choices=("c", "ct", "n"))
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--stars", action="store_true")
    p.set_defaults(func=cmd_test_coint)

    p = sub.add_parser("test-chow", help="bootstrap Chow test for a VAR")
    _add_input(p)
    _add_output(p)
    _add_lag(p)
    p.add_argument("--break-index", type=int)
    p.add_argument("--variant", choices=("break-point", "sample-split"), default="break-point")
    p.add_argument("--reps", type=int, default=399)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--stars", action="store_true")
    p.set_defaults(func=cmd_test_chow)

    p = sub.add_parser("corr", help="correlation matrix")
    _add_input(p)
    _add_output(p)
    _add_lag(p)
    p.add_argument("--kind", default="pearson",
                   choices=("pearson", "spearman", "kendall", "var-conditional", "var-partial"))
    p.add_argument("--upper", action="store_true", help="blank the lower triangle")
    p.add_argument("--decimals", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("static-conn", help="static VAR connectedness table")
    _add_input(p)
    _add_output(p)
    _add_lag(p)
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--cholesky", metavar="ORDER", help="comma-separated ordering for a Cholesky FEVD")
    p.add_argument("--fevd-out", metavar="CSV", help="also write the decomposition table")
    p.add_argument("--decimals", type=int, default=2)
    p.set_defaults(func=cmd_static_conn)

    p = sub.add_parser("dynamic-conn", help="time-varying connectedness")
    _add_input(p)
    _add_output(p)
    _add_lag(p)
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--kappa1", type=float, default=0.99)
    p.add_argument("--kappa2", type=float, default=0.99)
    p.add_argument("--prior-scale", type=float, default=0.1)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--rolling", type=int, metavar="WINDOW", help="re-fit a VAR on trailing windows")
    p.add_argument("--pair", help="A,B: two-column date/value series of --measure")
    p.add_argument("--node", help="NAME: date/value series of a node measure")
    p.add_argument("--measure", default="npdc",
                   choices=("npdc", "pci", "pii", "net", "receiver", "giver", "inc_own", "npt"))
    p.add_argument("--npdc-raw", action="store_true", help="report npdc with the opposite sign")
    p.add_argument("--n-jobs", type=int, default=1)
    p.set_defaults(func=cmd_dynamic_conn)

    p = sub.add_parser("export-net", help="DOT network of net pairwise dominance")
    _add_input(p, required=False)
    _add_output(p)
    _add_lag(p)
    p.add_argument("--fevd", metavar="CSV", help="decomposition table written by static-conn --fevd-out")
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--cholesky", metavar="ORDER")
    p.add_argument("--threshold", type=float, default=0.0)
    p.set_defaults(func=cmd_export_net)

    p = sub.add_parser("run", help="run the full workflow from a YAML config")
    p.add_argument("config")
    p.add_argument("--n-jobs", type=int)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "dynamic-conn" and args.pair and args.node:
            parser.error("--pair and --node are mutually exclusive")
        if args.command == "dynamic-conn" and args.pair and args.measure not in ("npdc", "pci", "pii"):
            parser.error("--pair needs --measure npdc, pci or pii")
    except SystemExit as exc:        # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        status = args.func(args)
    except UsageError as exc:
        print(f"spillover {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"spillover {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DataError as exc:
        print(f"spillover {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"spillover {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
