"""Seeded trial sweeps over methods and matvec budgets."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..bounds import SpectrumSplit, assemble_bound
from ..errors import KrylowError, ResourceError, ValidationError
from ..linalg import RngStream, apply_matfun, gaussian_matrix
from ..lowrank import (
    approx_error,
    krylov_aware,
    rand_svd_exact,
    rand_svd_matfun,
    single_vector_krylov_aware,
)
from ..operators import (
    adjacency_from_matrix_market,
    exp_decay_spectrum,
    inverse_square_log_spectrum,
    laplacian2d_operator,
    reference_eig,
    spin_chain_operator,
    synthetic_spectrum_operator,
)

RESULT_COLUMNS = (
    "method", "s", "r", "ell", "k", "matvecs", "budget", "trial",
    "rel_error", "optimal_rank_k_error", "omega_hash", "status",
)
TIMING_COLUMNS = ("method", "s", "r", "trial", "wall_time_ms")
BOUND_COLUMNS = (
    "bound_name", "s", "r", "k", "ell", "delta", "value", "rel_value",
    "poly_term", "tail_term", "E_term", "e_factor", "note",
)


def build_operator(spec, base_dir=None):
    """Construct the operator described by a config ``operator`` entry."""
    kind = spec.kind
    if kind == "laplacian2d":
        return laplacian2d_operator(spec.grid, spec.kappa, spec.lam)
    if kind == "spin_chain":
        return spin_chain_operator(spec.N, spec.h)
    if kind == "synthetic":
        sp = spec.spectrum
        if sp.family == "inverse_square_log":
            lam = inverse_square_log_spectrum(sp.n)
        elif sp.family == "exp_decay":
            lam = exp_decay_spectrum(sp.n, sp.rate)
        else:
            lam = np.asarray(sp.values, dtype=float)
        return synthetic_spectrum_operator(lam, label=f"synthetic({sp.family},n={lam.size})")
    if kind == "matrix_market":
        path = Path(spec.path)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        return adjacency_from_matrix_market(str(path))
    raise ValidationError(f"unknown operator kind {kind!r}")


def omega_hash(omega):
    return hashlib.sha256(np.ascontiguousarray(omega).tobytes()).hexdigest()[:16]


def single_vector_params(k, ell, s, r):
    """``(s', r')`` giving the single-vector method the block budget ``(s + r) * ell``."""
    return s * ell - k, r * ell


def _fmt(x):
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def _git_describe():
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             timeout=10, cwd=os.path.dirname(__file__))
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


class Reference:
    """Dense ``f(A)`` and its spectrum, computed once per experiment."""

    def __init__(self, op, f, k, cap):
        if op.dim > cap:
            raise ResourceError(
                f"exact errors need a dense reference of size {op.dim}, above dense_cap={cap}; "
                "scale the operator down or raise dense_cap"
            )
        self.eig = reference_eig(op, cap=cap)
        self.F = apply_matfun(None, f, eig=self.eig)
        self.split = SpectrumSplit(self.eig.eigenvalues, min(k, op.dim - 1), f) if op.dim > 1 else None
        nF = np.linalg.norm(self.F)
        if k >= op.dim:
            self.optimal = 0.0
        else:
            self.optimal = self.split.tail_norm() / nF


def _run_one(method, op, f, cfg, s, r, omega, ref):
    """Run one method; returns a list of (method_tag, approx)."""
    k, ell = cfg.k, cfg.ell
    view = op.counting_view()
    if method == "rand_svd_exact":
        a = rand_svd_exact(ref.F, k, ell, omega=omega)
        budget = 0
    elif method == "rand_svd_matfun":
        a = rand_svd_matfun(view, f, k, ell, s, r, omega=omega)
        budget = (s + r) * ell
    elif method == "krylov_aware":
        a = krylov_aware(view, f, k, ell, s, r, omega=omega)
        budget = (s + r) * ell
    elif method == "krylov_aware_direct":
        a = krylov_aware(view, f, k, ell, s + r, 0, omega=omega)
        budget = (s + r) * ell
    elif method == "single_vector":
        s1, r1 = single_vector_params(k, ell, s, r)
        if s1 < 0:
            raise ValidationError(f"budget (s={s}, r={r}) is too small for a matched single-vector run")
        a = single_vector_krylov_aware(view, f, k, s1, r1, omega=omega[:, :1])
        budget = k + s1 + r1
    else:
        raise ValidationError(f"unknown method {method!r}")
    return a, view.matvecs, budget


def _trial_rows(cfg, op, f, ref, trial):
    omega = gaussian_matrix(op.dim, cfg.ell, RngStream(cfg.seed, trial))
    h = omega_hash(omega)
    rows, timings = [], []
    for method in cfg.methods:
        for s, r in cfg.schedule():
            t0 = time.perf_counter()
            base = {"s": s, "r": r, "ell": cfg.ell, "k": cfg.k, "trial": trial,
                    "optimal_rank_k_error": ref.optimal, "omega_hash": h}
            try:
                a, mv, budget = _run_one(method, op, f, cfg, s, r, omega, ref)
                e_full = approx_error(a, ref.F)
                try:
                    e_trunc = approx_error(a.truncate(cfg.k), ref.F) if cfg.k < op.dim else e_full
                    trunc_status = "ok"
                except KrylowError as err:
                    e_trunc, trunc_status = math.nan, f"error: {err}"
                rows.append({**base, "method": method, "matvecs": mv, "budget": budget,
                             "rel_error": e_full, "status": "ok"})
                rows.append({**base, "method": method + "_trunc", "matvecs": mv, "budget": budget,
                             "rel_error": e_trunc, "status": trunc_status})
            except (KrylowError, ArithmeticError, np.linalg.LinAlgError) as err:
                for tag in (method, method + "_trunc"):
                    rows.append({**base, "method": tag, "matvecs": 0, "budget": 0,
                                 "rel_error": math.nan, "status": f"error: {err}"})
            ms = int(round(1000 * (time.perf_counter() - t0)))
            timings.append({"method": method, "s": s, "r": r, "trial": trial, "wall_time_ms": ms})
    return rows, timings


def _write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def compute_bounds(cfg, op, f, eigenvalues=None):
    """Bound reports for every requested kind and schedule entry, as rows."""
    if eigenvalues is None:
        if op.exact_spectrum is not None:
            eigenvalues = op.exact_spectrum
        else:
            eigenvalues = reference_eig(op, cap=cfg.dense_cap).eigenvalues
    split = SpectrumSplit(eigenvalues, cfg.k, f)
    nF = split.f_normF()
    rows = []
    for b in cfg.bounds:
        for s, r in cfg.schedule():
            if b.kind == "thm51":
                s1, r1 = single_vector_params(cfg.k, cfg.ell, s, r)
                ell_b, s_b, r_b = 1, s1, r1
            else:
                ell_b, s_b, r_b = cfg.ell, s, r
            row = {"bound_name": b.kind, "s": s, "r": r, "k": cfg.k, "ell": ell_b,
                   "delta": "" if b.delta is None else b.delta}
            try:
                rep = assemble_bound(b.kind, split, ell_b, s_b, r_b, delta=b.delta)
                c = rep.components
                row.update(value=rep.value, rel_value=rep.value / nF, poly_term=c["poly_term"],
                           tail_term=c["tail_term"], E_term=c["E_term"], e_factor=c["e_factor"],
                           note=";".join(f"{k}={_fmt(v)}" for k, v in sorted(rep.notes.items())))
            except ValidationError as err:
                row.update(value=math.nan, rel_value=math.nan, poly_term=math.nan, tail_term=math.nan,
                           E_term=math.nan, e_factor=math.nan, note=f"precondition: {err}")
            rows.append(row)
    return rows


def write_bounds(rows, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "bounds.csv", BOUND_COLUMNS, rows)


def run_experiment(cfg, out_dir, base_dir=None):
    """Run the sweep described by ``cfg`` and write results under ``out_dir``.

    Writes ``results.csv`` (deterministic for a fixed seed), ``timings.csv``,
    ``meta.json`` and, when bounds are requested, ``bounds.csv``.

    Returns
    -------
    dict
        Summary with row counts, the number of failed cells and the mean
        error per method.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    f = cfg.scalar_function()
    op = build_operator(cfg.operator, base_dir=base_dir)
    ref = Reference(op, f, cfg.k, cfg.dense_cap)

    def work(trial):
        return _trial_rows(cfg, op, f, ref, trial)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(work, range(cfg.trials)))
    else:
        parts = [work(t) for t in range(cfg.trials)]
    rows = [row for p in parts for row in p[0]]
    timings = [row for p in parts for row in p[1]]
    rows.sort(key=lambda d: (d["method"], d["s"], d["r"], d["trial"]))
    timings.sort(key=lambda d: (d["method"], d["s"], d["r"], d["trial"]))
    _write_csv(out / "results.csv", RESULT_COLUMNS, rows)
    _write_csv(out / "timings.csv", TIMING_COLUMNS, timings)

    if cfg.bounds:
        write_bounds(compute_bounds(cfg, op, f, eigenvalues=ref.eig.eigenvalues), out)

    meta = {
        "config": cfg.model_dump(mode="json", by_alias=True),
        "operator": op.label,
        "dimension": op.dim,
        "function": f.label(),
        "git_describe": _git_describe(),
        "version": __version__,
        "numpy": np.__version__,
        "seeds": {str(t): [cfg.seed, t] for t in range(cfg.trials)},
        "rng": "Philox over SeedSequence(seed, spawn_key=(trial,)), standard_normal",
    }
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")

    summary = {"rows": len(rows), "failed": sum(1 for r in rows if r["status"] != "ok"), "mean_error": {}}
    for m in sorted({r["method"] for r in rows}):
        errs = [r["rel_error"] for r in rows if r["method"] == m and r["status"] == "ok"]
        summary["mean_error"][m] = float(np.mean(errs)) if errs else math.nan
    return summary
