"""Command line: ``talmudic {utility,curves,simulate,scan,depth}``.

Exit status is 0 on success, 2 for usage errors, 3 for domain errors
(arguments outside an operation's range, thin order books), 4 for I/O
failures and 5 for malformed input files.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys

from .core import Holdings, UtilityContext, Weights, utility_value
from .curves import (
    CurveAnchor,
    budget_from_depth,
    estimate_depth_slope,
    fmt,
    load_book_csv,
    sample_curves,
    write_curves_csv,
)
from .errors import DomainError, ParseError
from .simulator import (
    TriggerPolicy,
    annualize,
    gen_gbm,
    gen_zigzag,
    load_path_csv,
    run_backtest,
    threshold_scan,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4
EXIT_PARSE = 5


def _tuple_of(*kinds):
    def parse(text):
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != len(kinds):
            raise argparse.ArgumentTypeError(
                f"expected {len(kinds)} comma-separated values, got {text!r}")
        try:
            return tuple(k(p) for k, p in zip(kinds, parts))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _float_list(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load_path(args):
    if args.path_csv is not None:
        with open(args.path_csv, "rb") as fh:
            return load_path_csv(fh)
    if args.zigzag is not None:
        return gen_zigzag(*args.zigzag)
    return gen_gbm(*args.gbm)


def cmd_utility(args):
    ctx = UtilityContext(args.p0, Weights(args.alpha))
    print(fmt(utility_value(Holdings(args.m, args.q), ctx)))


def cmd_curves(args):
    anchor = CurveAnchor(args.p0, args.q0, Weights(args.alpha))
    rows = sample_curves(anchor, args.n, args.qmax_fraction, args.q_extent)
    with _output(args.out) as fh:
        write_curves_csv(rows, fh)


def cmd_simulate(args):
    path = _load_path(args)
    policy = TriggerPolicy(args.threshold)
    report = run_backtest(path, Weights(args.alpha), policy, args.fee, args.wealth)
    doc = report.to_dict()
    if args.annualize is not None:
        per_trade = report.mean_pct_du()
        doc["annualized"] = {
            "trades_per_year": args.annualize,
            "per_trade_pct_du": per_trade,
            "annual_rate": annualize(per_trade, args.annualize),
            "convention": "compounded per trade",
            "assumption": f"exactly {args.annualize} fills per year, each at the run's mean per-fill growth",
        }
    with _output(args.out) as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def cmd_scan(args):
    path = _load_path(args)
    rows = threshold_scan(path, Weights(args.alpha), args.thresholds, args.fee, args.wealth)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "trade_count", "growth_ratio_total"])
        for r in rows:
            w.writerow([fmt(r.threshold), r.trade_count, fmt(r.growth_ratio_total)])


def cmd_depth(args):
    with open(args.book_csv, "rb") as fh:
        book = load_book_csv(fh)
    est = estimate_depth_slope(book, args.window)
    print(f"mid={fmt(est.mid)}")
    print(f"slope={fmt(est.slope)}")
    print(f"bid_slope={fmt(est.bid_slope)}")
    print(f"ask_slope={fmt(est.ask_slope)}")
    print(f"budget={fmt(budget_from_depth(est.mid, est.slope))}")


def _add_path_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--path-csv", metavar="FILE", help="price CSV with a 'price' header")
    src.add_argument("--zigzag", type=_tuple_of(float, float, int), metavar="P0,PCT_DP,N",
                     help="deterministic zigzag of N legs")
    src.add_argument("--gbm", type=_tuple_of(float, float, float, int, int),
                     metavar="P0,MU,SIGMA,N,SEED", help="seeded geometric Brownian motion")
    p.add_argument("--alpha", type=float, default=0.5, help="money share (default 0.5)")
    p.add_argument("--fee", type=float, default=0.0, help="proportional fee rate (default 0)")
    p.add_argument("--wealth", type=float, default=1.0, help="initial wealth (default 1)")
    p.add_argument("--out", default="-", help="output file, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="talmudic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("utility", help="evaluate the rule's utility u(m, q)")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_utility)

    p = sub.add_parser("curves", help="sample supply and demand curves to CSV")
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--q0", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--n", type=int, default=101)
    p.add_argument("--qmax-fraction", type=float, default=0.5,
                   help="supply cutoff as a fraction of q0 (default 0.5)")
    p.add_argument("--q-extent", type=float, default=None,
                   help="largest sampled quantity (default: the supply cutoff)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("simulate", help="backtest the rule over a price path, JSON report")
    _add_path_source(p)
    p.add_argument("--threshold", type=float, default=0.02,
                   help="relative price move that triggers a rebalance (default 0.02)")
    p.add_argument("--annualize", type=int, default=None, metavar="N",
                   help="append the rate compounded over N fills per year")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="backtest over a list of thresholds, CSV table")
    _add_path_source(p)
    p.add_argument("--thresholds", type=_float_list, required=True, metavar="T1,T2,...")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("depth", help="order-book depth slope and equivalent budget")
    p.add_argument("--book-csv", required=True, metavar="FILE")
    p.add_argument("--window", type=float, required=True)
    p.set_defaults(func=cmd_depth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        args.func(args)
    except ParseError as exc:
        print(f"talmudic: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"talmudic: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"talmudic: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
