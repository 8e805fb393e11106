"""Command-line interface.

CSV goes to standard output and diagnostics to standard error.  Output is
buffered until the command succeeds, so a usage error never leaves partial
output behind.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import exact, mc, oracle, seqcore
from .verify import run_verification

SCHEMA_VERSION = 1
SEED_ENV = "MGONAL_SEED"
EXACT_DIST_MAX_N = 10_000


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _seed(text: str) -> int:
    v = _nonneg(text)
    if v >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=_positive, required=True, help="bin size m >= 1")
    common.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    common.add_argument("--seed", type=_seed, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    common.add_argument("--threads", type=_positive, default=1, help="chunk count for sampling")
    common.add_argument("--schema-version", action="store_true", help="print a schema banner line first")

    parser = argparse.ArgumentParser(prog="mgonal", description="m-gonal numeration system tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seq", parents=[common], help="sequence terms")
    p.add_argument("--count", type=_positive, required=True)

    p = sub.add_parser("decompose", parents=[common], help="legal decompositions of integers")
    p.add_argument("z", nargs="+", type=_nonneg)

    p = sub.add_parser("dist", parents=[common], help="summand-count distribution")
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--samples", type=_positive)

    p = sub.add_parser("gaps", parents=[common], help="gap-length probabilities")
    p.add_argument("--n", type=_positive)
    p.add_argument("--mode", choices=["exact", "limit", "mc"], required=True)
    p.add_argument("--gmax", type=_positive, required=True)
    p.add_argument("--samples", type=_positive)
    p.add_argument("--convention", choices=list(exact.CONVENTIONS), default="signed")

    p = sub.add_parser("longest", parents=[common], help="longest gap on [a_n, a_{n+1})")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--samples", type=_positive, required=True)

    p = sub.add_parser("verify", parents=[common], help="exhaustive cross-checks")
    p.add_argument("--bins", type=_nonneg, required=True, help="enumerate bins b_0..b_BINS")
    p.add_argument("--deep", action="store_true")
    return parser


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class Output:
    def __init__(self, as_json: bool, banner: bool):
        self.as_json = as_json
        self.buf = io.StringIO()
        if banner:
            self.buf.write(f"# mgonal-schema {SCHEMA_VERSION}\n")

    def table(self, header, rows, footer=()):
        if self.as_json:
            self.json([dict(zip(header, r)) for r in rows] if not footer else {
                "rows": [dict(zip(header, r)) for r in rows],
                **dict(footer),
            })
            return
        w = csv.writer(self.buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        for key, value in footer:
            self.buf.write(f"# {key},{value}\n")

    def json(self, obj):
        self.buf.write(json.dumps(obj, default=_json_default))
        self.buf.write("\n")


def _json_default(obj):
    if isinstance(obj, Fraction):
        return _frac(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def cmd_seq(args, out: Output):
    terms = seqcore.sequence_prefix(args.m, args.count)
    out.table(["n", "bin", "a_n"], [(i, seqcore.bin_of(args.m, i), t) for i, t in enumerate(terms)])


def cmd_decompose(args, out: Output):
    rows = []
    for z in args.z:
        d = seqcore.decompose(args.m, z)
        total = seqcore.recompose(args.m, d)
        rows.append(
            {
                "z": z,
                "indices": list(reversed(d.indices)),
                "values": d.summands(),
                "bins": list(reversed(d.bins())),
                "gaps": list(seqcore.gaps_of(d)),
                "sum": total,
            }
        )
    if out.as_json:
        out.json(rows)
        return
    join = lambda xs: ";".join(str(x) for x in xs)
    out.table(
        ["z", "indices", "values", "bins", "gaps", "sum"],
        [(r["z"], join(r["indices"]), join(r["values"]), join(r["bins"]), join(r["gaps"]), r["sum"]) for r in rows],
    )


def _check_dist(args):
    if args.exact == (args.samples is not None):
        raise UsageError("dist needs exactly one of --exact or --samples N")
    if args.exact and args.n > EXACT_DIST_MAX_N:
        raise UsageError(f"--exact is limited to n <= {EXACT_DIST_MAX_N}")


def cmd_dist(args, out: Output):
    if args.exact:
        dist = exact.pnk_row_closed(args.m, args.n)
        mom = exact.exact_moments(args.m, args.n)
        footer = [
            ("mean", _frac(mom.mean)),
            ("variance", _frac(mom.variance)),
            ("mean_float", float(mom.mean)),
            ("variance_float", float(mom.variance)),
        ]
        out.table(["k", "p_nk"], list(enumerate(dist.counts)), footer)
        return
    cfg = mc.SamplerConfig(args.m, args.n, args.samples, seed=args.seed, chunks=args.threads)
    report = mc.run_summand_experiment(cfg)
    if out.as_json:
        out.json(report.to_dict())
        return
    footer = [
        (key, getattr(report, key))
        for key in (
            "m", "n", "sample_count", "seed", "chunks", "sample_mean", "sample_variance",
            "predicted_mean", "predicted_variance", "skewness", "excess_kurtosis", "ks_statistic",
        )
    ]
    out.table(["k", "count"], sorted(report.histogram.items()), footer)


def _check_gaps(args):
    if args.mode in ("exact", "mc") and args.n is None:
        raise UsageError(f"--mode {args.mode} needs --n")
    if args.mode == "mc" and args.samples is None:
        raise UsageError("--mode mc needs --samples")
    if args.mode != "mc" and args.samples is not None:
        raise UsageError("--samples only applies to --mode mc")


def cmd_gaps(args, out: Output):
    m = args.m
    if args.mode == "limit":
        table = exact.gap_table_limit(m, args.gmax)
        rows = [(g, a, b, _frac(p)) for g, a, b, p in table.rows()]
        out.table(["g", "alpha", "beta", "probability"], rows)
        return
    if args.mode == "exact":
        table = exact.gap_table_finite(m, args.n, args.gmax, args.convention)
        if table.convention != args.convention:
            print(f"note: closed form undefined at m={m}, n={args.n}; using {table.convention} convention",
                  file=sys.stderr)
        rows = [(g, a, b, _frac(p)) for g, a, b, p in table.rows()]
        out.table(["g", "alpha", "beta", "probability"], rows, [("convention", table.convention)] if out.as_json else ())
        return
    cfg = mc.SamplerConfig(m, args.n, args.samples, seed=args.seed, chunks=args.threads)
    report = mc.run_gap_experiment(cfg)
    total = report.extras["total_gaps"]
    rows = []
    for g in range(1, args.gmax + 1):
        a, b = exact.split_gap(m, g)
        emp = report.histogram.get(g, 0) / total if total else 0.0
        rows.append((g, a, b, _frac(exact.gap_prob_limit(m, g)), repr(emp)))
    footer = [("total_gaps", total), ("ks_statistic", report.ks_statistic), ("seed", cfg.seed), ("chunks", cfg.chunks)]
    out.table(["g", "alpha", "beta", "probability", "empirical"], rows, footer)


def _check_longest(args):
    if args.n < 2 * args.m:
        raise UsageError("longest needs n >= 2m")


def cmd_longest(args, out: Output):
    cfg = mc.SamplerConfig(args.m, args.n, args.samples, seed=args.seed, interval="bracket", chunks=args.threads)
    report = mc.run_longest_gap_experiment(cfg)
    ex = report.extras
    header = [
        "m", "n", "samples", "seed", "threads", "mean", "variance", "main_term",
        "schilling_refined", "schilling_variance", "empty_bin_estimate", "offset",
    ]
    row = (
        cfg.m, cfg.n, cfg.sample_count, cfg.seed, cfg.chunks, report.sample_mean, report.sample_variance,
        ex["main_term"], ex["schilling_refined"], report.predicted_variance, ex["empty_bin_estimate"], ex["offset"],
    )
    if out.as_json:
        out.json(dict(zip(header, row)) | {"histogram": report.to_dict()["histogram"]})
        return
    out.table(header, [row])


def cmd_verify(args, out: Output) -> int:
    try:
        results = run_verification(args.m, args.bins, deep=args.deep)
    except oracle.InstanceTooLargeError as exc:
        raise UsageError(str(exc))
    rows = [(r.name, "pass" if r.passed else "FAIL", r.detail) for r in results]
    out.table(["check", "status", "detail"], rows)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "seq": (cmd_seq, None),
    "decompose": (cmd_decompose, None),
    "dist": (cmd_dist, _check_dist),
    "gaps": (cmd_gaps, _check_gaps),
    "longest": (cmd_longest, _check_longest),
    "verify": (cmd_verify, None),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    run, check = COMMANDS[args.command]
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if check is not None:
            check(args)
        out = Output(args.json, args.schema_version)
        status = run(args, out) or 0
    except UsageError as exc:
        parser.exit(2, f"{parser.prog} {args.command}: error: {exc}\n")
    sys.stdout.write(out.buf.getvalue())
    return status


if __name__ == "__main__":
    sys.exit(main())
