"""Aggregate ``results.csv`` into plot-ready series."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

from ..errors import ParseError

REQUIRED = ("method", "s", "r", "matvecs", "trial", "rel_error", "optimal_rank_k_error", "status")
SERIES_COLUMNS = ("series", "s", "r", "matvecs", "count", "mean", "min", "max")


def read_results(path):
    """Parse ``results.csv`` into a list of typed dicts.

    Raises
    ------
    ParseError
        On a missing column or an unparsable value; the message names the
        row number (the header is row 1).
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("results file is empty", lineno=1) from None
        missing = [c for c in REQUIRED if c not in header]
        if missing:
            raise ParseError(f"missing columns {missing}", lineno=1)
        idx = {c: header.index(c) for c in header}
        for rowno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(raw)}", lineno=rowno)
            try:
                rows.append({
                    "method": raw[idx["method"]],
                    "s": int(raw[idx["s"]]),
                    "r": int(raw[idx["r"]]),
                    "matvecs": int(raw[idx["matvecs"]]),
                    "trial": int(raw[idx["trial"]]),
                    "rel_error": float(raw[idx["rel_error"]]),
                    "optimal": float(raw[idx["optimal_rank_k_error"]]),
                    "status": raw[idx["status"]],
                })
            except ValueError as err:
                raise ParseError(f"bad value: {err}", lineno=rowno) from None
    return rows


def aggregate(rows):
    """Mean, min and max error per ``(method, s, r)`` over successful trials.

    The ``matvecs`` coordinate of a point is the largest count observed in
    the group, which is the analytic budget unless every trial deflated.
    """
    groups = defaultdict(list)
    for row in rows:
        if row["status"] == "ok" and math.isfinite(row["rel_error"]):
            groups[(row["method"], row["s"], row["r"])].append(row)
    out = []
    for (method, s, r), grp in sorted(groups.items()):
        errs = [g["rel_error"] for g in grp]
        out.append({
            "series": method, "s": s, "r": r,
            "matvecs": max(g["matvecs"] for g in grp),
            "count": len(errs),
            "mean": sum(errs) / len(errs),
            "min": min(errs),
            "max": max(errs),
        })
    return out


def optimal_line(rows, points):
    """The optimal rank-k error repeated at every budget that appears in ``points``."""
    vals = {row["optimal"] for row in rows if math.isfinite(row["optimal"])}
    if not vals:
        return []
    opt = max(vals)
    budgets = sorted({(p["s"], p["r"], p["matvecs"]) for p in points})
    return [{"series": "optimal", "s": s, "r": r, "matvecs": mv, "count": 1,
             "mean": opt, "min": opt, "max": opt} for s, r, mv in budgets]


def emit_plotdata(results_csv, out):
    """Write ``plotdata.csv`` with one row per aggregated point.

    Parameters
    ----------
    results_csv : path
    out : path
        Output directory, or a file path ending in ``.csv``.

    Returns
    -------
    pathlib.Path
        The file written.
    """
    rows = read_results(results_csv)
    points = aggregate(rows)
    points += optimal_line(rows, points)
    out = Path(out)
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "plotdata.csv"
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_COLUMNS)
        for p in points:
            w.writerow([p[c] if not isinstance(p[c], float) else "%.17g" % p[c] for c in SERIES_COLUMNS])
    return out
