"""Command line interface.

Exit codes: 0 success, 1 validation error, 2 numerical or resource
failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..errors import NumericalError, ResourceError, ValidationError
from ..linalg import DEFLATION_TOL, RngStream
from ..matrix_market import write_matrix_market

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3


def graph_adjacency(kind):
    """Adjacency matrix for ``path:N``, ``cycle:N`` or ``random:N,P[,SEED]``."""
    name, _, args = kind.partition(":")
    try:
        parts = [a for a in args.split(",") if a]
        n = int(parts[0])
    except (ValueError, IndexError):
        raise ValidationError(f"cannot parse graph spec {kind!r}; expected e.g. path:10") from None
    if n < 2:
        raise ValidationError("graphs need at least 2 vertices")
    if name in ("path", "cycle"):
        i = np.arange(n - 1)
        rows, cols = list(i + 1), list(i)
        if name == "cycle" and n > 2:
            rows.append(n - 1)
            cols.append(0)
        L = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        return (L + L.T).tocsr()
    if name == "random":
        if len(parts) < 2:
            raise ValidationError("random graphs need random:N,P[,SEED]")
        p = float(parts[1])
        seed = int(parts[2]) if len(parts) > 2 else 0
        if not 0.0 <= p <= 1.0:
            raise ValidationError("edge probability must lie in [0, 1]")
        rng = RngStream(seed, 0).generator()
        mask = np.tril(rng.random((n, n)) < p, -1)
        L = sp.coo_matrix(mask.astype(float))
        return (L + L.T).tocsr()
    raise ValidationError(f"unknown graph kind {name!r}; use path, cycle or random")


def _cmd_run(args):
    from .config import parse_config
    from .experiment import run_experiment

    cfg = parse_config(args.config)
    if args.workers is not None:
        cfg = cfg.model_copy(update={"workers": args.workers})
    summary = run_experiment(cfg, args.out, base_dir=Path(args.config).resolve().parent)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_bounds(args):
    from .config import parse_config
    from .experiment import build_operator, compute_bounds, write_bounds

    cfg = parse_config(args.config)
    if not cfg.bounds:
        raise ValidationError("config lists no bounds")
    op = build_operator(cfg.operator, base_dir=Path(args.config).resolve().parent)
    rows = compute_bounds(cfg, op, cfg.scalar_function())
    write_bounds(rows, args.out)
    print(f"wrote {len(rows)} bound rows to {Path(args.out) / 'bounds.csv'}")
    return EXIT_OK


def _cmd_verify(args):
    from .verify import run_verification

    report = run_verification(args.suite, seed=args.seed, defl_tol=args.defl_tol)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} measured={c.measured:.3g} "
              f"threshold={c.threshold:.3g} slack={c.slack:.3g}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    print(f"{sum(c.passed for c in report.checks)}/{len(report.checks)} checks passed "
          f"in {report.seconds:.1f} s")
    return EXIT_OK if report.passed else EXIT_VERIFY


def _cmd_gen_matrix(args):
    A = graph_adjacency(args.kind)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_matrix_market(args.out, A, field="pattern", comment=f"generated graph {args.kind}")
    print(f"wrote {args.out} (n={A.shape[0]}, edges={A.nnz // 2})")
    return EXIT_OK


def _cmd_plot_data(args):
    from .plotdata import emit_plotdata

    path = emit_plotdata(args.results, args.out)
    print(f"wrote {path}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="krylow", description="Krylov-aware low-rank approximation experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None, help="override the config worker count")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bounds", help="evaluate the configured bounds only")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--suite", choices=("fast", "full"), default="fast")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--defl-tol", type=float, default=DEFLATION_TOL,
                   help="deflation tolerance for the nesting check (raise it for a negative control)")
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("gen-matrix", help="write a small graph adjacency in Matrix Market format")
    p.add_argument("--kind", required=True, help="path:N, cycle:N or random:N,P[,SEED]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_matrix)

    p = sub.add_parser("plot-data", help="aggregate results.csv into plot series")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot_data)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, ResourceError, ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
