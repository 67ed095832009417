"""Command line entry point: ``gauge-lab {curve,gauge-demo,pathab,audit}``.

Every command is deterministic given its flags. Failures exit nonzero with a
JSON object ``{"error": ..., "message": ...}`` on stderr.
"""

import argparse
import json
import logging
import os
import sys

from . import __version__
from .datagen import STANDARD_FIXTURE, SyntheticSpec
from .exceptions import DivergenceError, GaugeLabError
from .experiments import AuditThresholds, audit_embeddings, run_pathab
from .fileio import curve_to_csv, format_g17, read_embeddings, write_csv_table
from .gauge import gauge_demo_table
from .geometry import equivalence_curve

SEED_ENV = "GAUGE_LAB_SEED"


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return STANDARD_FIXTURE.seed
    try:
        return int(raw)
    except ValueError:
        raise GaugeLabError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit_json(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_curve(args):
    curve_to_csv(args.out or sys.stdout, equivalence_curve(args.samples))
    return 0


def cmd_gauge_demo(args):
    rows = [[label, format_g17(d1), format_g17(d2), format_g17(c), format_g17(ip)]
            for label, d1, d2, c, ip in gauge_demo_table()]
    write_csv_table(args.out or sys.stdout, ("gauge_label", "d1", "d2", "cosine", "inner_product"), rows)
    return 0


def cmd_pathab(args):
    seed = args.seed if args.seed is not None else _default_seed()
    spec = SyntheticSpec(m=args.m, n=args.n, true_rank=args.rank, noise_sigma=args.noise, seed=seed)
    try:
        report = run_pathab(
            spec,
            k=args.k,
            lam=args.lam,
            gauge_trials=args.gauge_trials,
            neighbors=args.neighbors,
            max_iters=args.max_iters,
        )
    except DivergenceError as exc:
        raise DivergenceError(f"pathab (seed={seed}, k={args.k}, lambda={args.lam}): {exc}", exc.iteration) from exc
    _emit_json(report, args.out)
    return 0


def cmd_audit(args):
    seed = args.seed if args.seed is not None else _default_seed()
    ids, X = read_embeddings(args.path, args.format)
    thresholds = AuditThresholds(spread=args.spread_threshold, overlap=args.overlap_threshold, unit_tol=args.unit_tol)
    report = audit_embeddings(
        X, source=args.path, gauge_trials=args.gauge_trials, k=args.k, seed=seed, thresholds=thresholds, ids=ids
    )
    _emit_json(report.to_dict(), args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="gauge-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver events to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="cosine vs half squared Euclidean distance over [0, 180] degrees (CSV)")
    p.add_argument("--samples", type=int, default=181)
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("gauge-demo", help="cosine of a fixed pair under three gauges (CSV)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_gauge_demo)

    fx = STANDARD_FIXTURE
    p = sub.add_parser("pathab", help="post-hoc normalization (A) vs sphere-constrained training (B)")
    p.add_argument("--m", type=int, default=fx.m, help="users")
    p.add_argument("--n", type=int, default=fx.n, help="items")
    p.add_argument("--rank", type=int, default=fx.true_rank, help="true rank of the synthetic data")
    p.add_argument("--noise", type=float, default=fx.noise_sigma, help="noise sigma")
    p.add_argument("--seed", type=int, default=None, help=f"data seed (default: ${SEED_ENV} or {fx.seed})")
    p.add_argument("--k", type=int, default=4, help="factorization rank")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--gauge-trials", type=int, default=100)
    p.add_argument("--neighbors", type=int, default=5, help="k for the neighbourhood-overlap statistic")
    p.add_argument("--max-iters", type=int, default=50_000)
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.set_defaults(func=cmd_pathab)

    p = sub.add_parser("audit", help="check an embedding file for gauge sensitivity (JSON to stdout)")
    p.add_argument("path")
    p.add_argument("--format", choices=("csv", "jsonl"), default=None, help="default: from extension")
    p.add_argument("--gauge-trials", type=int, default=20)
    p.add_argument("--k", type=int, default=10, help="neighbours per query")
    p.add_argument("--seed", type=int, default=None, help=f"gauge seed (default: ${SEED_ENV} or {fx.seed})")
    p.add_argument("--spread-threshold", type=float, default=AuditThresholds.spread)
    p.add_argument("--overlap-threshold", type=float, default=AuditThresholds.overlap)
    p.add_argument("--unit-tol", type=float, default=AuditThresholds.unit_tol)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (GaugeLabError, ValueError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        line = getattr(exc, "line", None)
        if line is not None:
            err["line"] = line
        iteration = getattr(exc, "iteration", None)
        if iteration is not None:
            err["iteration"] = iteration
        sys.stderr.write(json.dumps(err) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
