"""Executable invariant checks with measured slack.

Each check records the measured quantity, the threshold it is held to and
``slack = threshold - measured`` (nonnegative means the check passed). The
fast suite uses instances with ``n <= 100``; the full suite adds the Monte
Carlo bound checks with 200 Gaussian draws.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from ..bounds import (
    E_candidate,
    E_omega_candidate,
    E_omega_upper,
    SpectrumSplit,
    _in_variable,
    assemble_bound,
    candidate_family,
    poly_err,
    split_omega,
)
from ..errors import ValidationError
from ..functions import ScalarFunction
from ..lanczos import (
    block_lanczos,
    extend_lanczos,
    lanczos_fom,
    lanczos_quadform,
    leading_principal,
    matfun_T,
)
from ..linalg import (
    DEFLATION_TOL,
    RngStream,
    apply_matfun,
    jacobi_eig,
    orth_basis,
    subspace_distance,
    sym_eig,
    truncate_sym,
)
from ..lowrank import approx_error, krylov_aware, rand_svd_matfun
from ..operators import (
    dense_operator,
    exp_decay_spectrum,
    inverse_square_log_spectrum,
    laplacian2d_operator,
    reference_eig,
    shifted_operator,
    spin_chain_operator,
    synthetic_spectrum_operator,
)

SUITES = ("fast", "full")


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    @property
    def slack(self):
        return self.threshold - self.measured


@dataclass
class VerificationReport:
    suite: str
    checks: list
    seconds: float

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "suite": self.suite,
            "passed": self.passed,
            "seconds": self.seconds,
            "checks": [{**asdict(c), "slack": c.slack} for c in self.checks],
        }


def _le(name, measured, threshold, detail=""):
    measured = float(measured)
    return CheckResult(name, bool(measured <= threshold), measured, float(threshold), detail)


def _rand_sym(rng, n, scale=1.0):
    B = rng.standard_normal((n, n))
    S = 0.5 * (B + B.T)
    return scale * S / np.linalg.norm(S, 2)


def _rand_poly(rng, deg):
    return ScalarFunction.polynomial(rng.uniform(-1.0, 1.0, deg + 1))


def _horner_matrix(M, coeffs):
    out = np.zeros_like(M)
    eye = np.eye(M.shape[0])
    for c in reversed(coeffs):
        out = out @ M + c * eye
    return out


# ---------------------------------------------------------------------------
# dense linear algebra


def check_linalg(rng):
    out = []
    worst_rec = worst_jac = worst_poly = worst_trunc = worst_idem = 0.0
    for _ in range(10):
        n = int(rng.integers(2, 40))
        M = _rand_sym(rng, n, scale=rng.uniform(0.1, 10.0))
        nM = np.linalg.norm(M)
        eig = sym_eig(M)
        worst_rec = max(worst_rec, np.linalg.norm(eig.reconstruct() - M) / (n * nM))
        jac_lam, _ = jacobi_eig(M)
        worst_jac = max(worst_jac, np.max(np.abs(jac_lam - eig.eigenvalues)) / nM)
        p = _rand_poly(rng, int(rng.integers(0, 6)))
        P = _horner_matrix(M, p.coefficients)
        worst_poly = max(worst_poly, np.linalg.norm(apply_matfun(M, p) - P) / max(np.linalg.norm(P), 1e-300))
        k = int(rng.integers(1, n + 1))
        Xk = truncate_sym(M, k)
        lam = eig.eigenvalues[np.argsort(-np.abs(eig.eigenvalues), kind="stable")]
        disc = np.linalg.norm(lam[k:])
        worst_trunc = max(worst_trunc, abs(np.linalg.norm(M - Xk) - disc) / max(nM, 1e-300))
        out_rank = np.linalg.matrix_rank(Xk, tol=1e-9 * nM)
        if out_rank > k:
            worst_trunc = math.inf
        V, _ = np.linalg.qr(rng.standard_normal((n, max(1, n // 2))))
        W, _, _ = orth_basis(V)
        worst_idem = max(worst_idem, np.max(np.abs(np.abs(np.sum(W * V, axis=0)) - 1.0)))
    out.append(_le("linalg.eig_reconstruct", worst_rec, 1e-10, "||U L U^T - M||_F / (n ||M||_F)"))
    out.append(_le("linalg.jacobi_vs_lapack", worst_jac, 1e-12, "eigenvalue agreement of two solvers"))
    out.append(_le("linalg.matfun_vs_horner", worst_poly, 1e-9))
    out.append(_le("linalg.truncate_error", worst_trunc, 1e-10, "error equals discarded eigenvalue norm"))
    out.append(_le("linalg.orth_idempotent", worst_idem, 1e-12, "columns equal up to sign"))
    return out


# ---------------------------------------------------------------------------
# operators


def _probe(op, rng, probes=20):
    worst_lin = worst_sym = 0.0
    for _ in range(probes):
        x, y = rng.standard_normal(op.dim), rng.standard_normal(op.dim)
        a, b = rng.standard_normal(2)
        Ax, Ay = op.apply(x), op.apply(y)
        lhs = op.apply(a * x + b * y)
        worst_lin = max(worst_lin, np.linalg.norm(lhs - a * Ax - b * Ay)
                        / max(np.linalg.norm(a * Ax) + np.linalg.norm(b * Ay), 1e-300))
        worst_sym = max(worst_sym, abs(x @ Ay - y @ Ax) / max(np.linalg.norm(x) * np.linalg.norm(Ay), 1e-300))
    return worst_lin, worst_sym


def check_operators(rng):
    ops = [
        laplacian2d_operator(8),
        spin_chain_operator(6, 1.0),
        synthetic_spectrum_operator(inverse_square_log_spectrum(80)),
        dense_operator(_rand_sym(rng, 50)),
    ]
    out = []
    for op in ops:
        lin, sym = _probe(op, rng)
        out.append(_le(f"operators.linearity[{op.label}]", lin, 1e-12))
        out.append(_le(f"operators.symmetry[{op.label}]", sym, 1e-12))
    spin = spin_chain_operator(6, 0.7)
    X = rng.standard_normal((spin.dim, 5))
    Y = spin.apply(X)
    cols = np.column_stack([spin.apply(X[:, j]) for j in range(5)])
    out.append(_le("operators.spin_block_equals_columns", np.max(np.abs(Y - cols)), 0.0, "exact equality"))
    lap = laplacian2d_operator(6)
    dense_eigs = np.linalg.eigvalsh(lap.to_dense())
    out.append(_le("operators.laplacian_spectrum", np.max(np.abs(dense_eigs - lap.exact_spectrum)),
                   1e-10 * np.max(np.abs(dense_eigs))))
    worst = 0.0
    for op in ops[:3]:
        om = rng.standard_normal((op.dim, 2))
        for c in (-5.0, 5.0):
            a = block_lanczos(op, om, 4)
            b = block_lanczos(shifted_operator(op, c), om, 4)
            worst = max(worst, subspace_distance(a.Q, b.Q))
    out.append(_le("operators.shift_identity_spans", worst, 1e-8, "principal angle"))
    return out


# ---------------------------------------------------------------------------
# block Lanczos


def check_lanczos(rng, defl_tol=DEFLATION_TOL):
    out = []
    worst_fom = worst_quad = 0.0
    for _ in range(20):
        n = int(rng.integers(20, 101))
        ell = int(rng.choice([1, 2, 4]))
        s = int(rng.integers(2, 7))
        op = dense_operator(_rand_sym(rng, n))
        A = op.to_dense()
        om = rng.standard_normal((n, ell))
        res = block_lanczos(op, om, s)
        p = _rand_poly(rng, s - 1)
        ex = _horner_matrix(A, p.coefficients) @ om
        worst_fom = max(worst_fom, np.linalg.norm(lanczos_fom(res, p) - ex) / max(np.linalg.norm(ex), 1e-300))
        p2 = _rand_poly(rng, 2 * s - 1)
        exq = om.T @ _horner_matrix(A, p2.coefficients) @ om
        worst_quad = max(worst_quad, np.linalg.norm(lanczos_quadform(res, p2) - exq)
                         / max(np.linalg.norm(exq), 1e-300))
    out.append(_le("lanczos.fom_polynomial_exact", worst_fom, 1e-8))
    out.append(_le("lanczos.quadform_polynomial_exact", worst_quad, 1e-8))

    worst_nest, detail = 0.0, ""
    clustered = synthetic_spectrum_operator(inverse_square_log_spectrum(100))
    for op in (clustered, laplacian2d_operator(8), spin_chain_operator(6)):
        for s, r, ell in ((3, 2, 3), (2, 4, 2), (4, 3, 1)):
            om = rng.standard_normal((op.dim, ell))
            reference = block_lanczos(op, om, s + r)
            ext = extend_lanczos(block_lanczos(op, om, s, defl_tol=defl_tol), op, r)
            d = subspace_distance(ext.Q, reference.Q)
            if d > worst_nest:
                worst_nest, detail = d, f"{op.label} s={s} r={r} ell={ell} dims {ext.dim} vs {reference.dim}"
    out.append(_le("lanczos.krylov_nesting", worst_nest, 1e-8, detail or "principal angle"))

    worst_l24 = -math.inf
    f = ScalarFunction.exp()
    for op in (laplacian2d_operator(8, kappa=0.01), synthetic_spectrum_operator(exp_decay_spectrum(100, 0.1))):
        eig = reference_eig(op)
        F = apply_matfun(None, f, eig=eig)
        spec = SpectrumSplit(eig.eigenvalues, 1, f)
        for s, r, ell in ((3, 1, 2), (2, 2, 3), (4, 2, 2)):
            om = rng.standard_normal((op.dim, ell))
            res = block_lanczos(op, om, s + r)
            Qs, d = leading_principal(res, s)
            lhs = np.linalg.norm(Qs.T @ F @ Qs - matfun_T(res, f)[:d, :d])
            rhs = 2.0 * math.sqrt(ell * s) * poly_err(spec, r)
            worst_l24 = max(worst_l24, lhs - rhs)
    out.append(_le("lanczos.quadratic_form_error", worst_l24, 1e-12, "lhs - 2 sqrt(ell s) E_poly"))

    res = block_lanczos(clustered, rng.standard_normal((100, 1)), 100)
    orth = np.linalg.norm(res.Q.T @ res.Q - np.eye(res.dim), 2)
    out.append(_le("lanczos.reorthogonalization", orth, res.dim * 1e-10, f"q=100, d={res.dim}"))
    return out


# ---------------------------------------------------------------------------
# low-rank approximations


def _family_ops():
    return [
        ("exp", laplacian2d_operator(8), ScalarFunction.exp()),
        ("exp_neg", spin_chain_operator(6, 1.0), ScalarFunction.exp(-0.3)),
        ("log", synthetic_spectrum_operator(inverse_square_log_spectrum(100)), ScalarFunction.log()),
        ("exp_decay", synthetic_spectrum_operator(exp_decay_spectrum(100, 0.2)), ScalarFunction.exp()),
    ]


def check_lowrank(rng):
    out = []
    floor = dom = order = -math.inf
    k, ell = 5, 7
    for _name, op, f in _family_ops():
        eig = reference_eig(op)
        F = apply_matfun(None, f, eig=eig)
        nF = np.linalg.norm(F)
        spec = SpectrumSplit(eig.eigenvalues, k, f)
        opt = spec.tail_norm() / nF
        for s, r in ((2, 1), (3, 2)):
            om = rng.standard_normal((op.dim, ell))
            ka = krylov_aware(op, f, k, ell, s, r, omega=om)
            rs = rand_svd_matfun(op, f, k, ell, s, r, omega=om)
            e_ka_k = approx_error(ka.truncate(k), F)
            e_rs_k = approx_error(rs.truncate(k), F)
            floor = max(floor, (1 - 1e-10) * opt - e_ka_k, (1 - 1e-10) * opt - e_rs_k)
            dom = max(dom, approx_error(ka, F) - e_ka_k)
            slack = 4.0 * math.sqrt(ell * s) * poly_err(spec, r) / nF
            order = max(order, e_ka_k - e_rs_k - slack)
    out.append(_le("lowrank.optimal_floor", floor, 0.0, "optimal - error"))
    out.append(_le("lowrank.untruncated_dominates", dom, 1e-12, "error(ALG) - error(ALG_k)"))
    out.append(_le("lowrank.ordering_vs_naive", order, 1e-12))

    rob, pyth = robustness_slack(rng, 30)
    out.append(_le("lowrank.robustness_inequality", -rob, 1e-9, "negated slack"))
    out.append(_le("lowrank.pythagorean_identity", pyth, 1e-8, "relative mismatch"))

    out.append(_le("lowrank.exp_shift_covariance", shift_covariance_spread(rng), 1e-10))
    return out


def robustness_instance(rng, n=None):
    """One synthetic ``(F, Q, X, k)`` with a controlled core perturbation."""
    n = int(rng.integers(5, 61)) if n is None else n
    d = int(rng.integers(1, n + 1))
    k = int(rng.integers(1, d + 1))
    lam = rng.standard_normal(n) * np.exp(-rng.uniform(0, 3) * np.arange(n) / n)
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    F = (U * lam) @ U.T
    F = 0.5 * (F + F.T)
    Q, _ = np.linalg.qr(rng.standard_normal((n, d)))
    E = rng.standard_normal((d, d)) * 10 ** rng.uniform(-6, 0)
    X = Q.T @ F @ Q + 0.5 * (E + E.T)
    return F, Q, X, k


def robustness_slack(rng, count):
    """Minimum slack of the robustness inequality and worst Pythagorean mismatch."""
    rob, pyth = math.inf, 0.0
    for _ in range(count):
        F, Q, X, k = robustness_instance(rng)
        G = Q.T @ F @ Q
        E = X - G
        lhs = np.linalg.norm(F - Q @ truncate_sym(X, k) @ Q.T)
        rhs = np.linalg.norm(F - Q @ truncate_sym(G, k) @ Q.T) + 2.0 * np.linalg.norm(E)
        rob = min(rob, (rhs - lhs) / np.linalg.norm(F))
        a = np.linalg.norm(F - Q @ X @ Q.T) ** 2
        P = Q @ Q.T
        b = np.linalg.norm(F - P @ F @ P) ** 2 + np.linalg.norm(G - X) ** 2
        pyth = max(pyth, abs(a - b) / max(a, b, 1e-300))
    return rob, pyth


def shift_covariance_spread(rng, shifts=(-5.0, 0.0, 5.0)):
    op = laplacian2d_operator(8)
    f = ScalarFunction.exp()
    F = apply_matfun(None, f, eig=reference_eig(op))
    om = rng.standard_normal((op.dim, 4))
    errs = []
    for c in shifts:
        a = krylov_aware(shifted_operator(op, c), f, 3, 4, 3, 2, omega=om)
        errs.append(approx_error(a.truncate(3), math.exp(-c) * F))
    return max(errs) - min(errs)


# ---------------------------------------------------------------------------
# bounds


def structural_slack(op, f, k, ell, s, rng):
    """``tail^2 + 5 E_omega - error^2`` for one exact-projection trial, relative to ``||f(A)||^2``."""
    eig = reference_eig(op)
    F = apply_matfun(None, f, eig=eig)
    spec = SpectrumSplit(eig.eigenvalues, k, f)
    om = rng.standard_normal((op.dim, ell))
    res = block_lanczos(op, om, s)
    Q = res.Q
    err2 = np.linalg.norm(F - Q @ truncate_sym(Q.T @ F @ Q, k) @ Q.T) ** 2
    ok, ot = split_omega(spec, eig.eigenvectors, om)
    e_om, _ = E_omega_upper(spec, s, ok, ot)
    return (spec.tail_norm() ** 2 + 5.0 * e_om - err2) / np.linalg.norm(F) ** 2


def check_bounds(rng):
    out = []
    worst = math.inf
    k, ell = 4, 6
    for _name, op, f in _family_ops():
        for s in (2, 3):
            worst = min(worst, structural_slack(op, f, k, ell, s, rng))
    out.append(_le("bounds.structural", -worst, 1e-12, "negated relative slack"))
    worst_rec = 0.0
    spec = SpectrumSplit(exp_decay_spectrum(60, 0.2), 5, ScalarFunction.exp())
    for kind, delta in (("thm35_tail", 0.1), ("thm35_expectation", None), ("thm51", 0.5)):
        rep = assemble_bound(kind, spec, 9, 6, 3, delta=delta)
        worst_rec = max(worst_rec, abs(rep.recombine() - rep.value) / rep.value)
    out.append(_le("bounds.recombination", worst_rec, 1e-12))
    return out


def best_candidate(spec, s):
    """The registered candidate attaining the smallest E bound."""
    best, arg = math.inf, None
    for label, p, var in candidate_family(spec, s):
        v = E_candidate(_in_variable(spec, var), p)
        if v < best:
            best, arg = v, (label, p, var)
    return best, arg


def monte_carlo_E_omega(rng, draws=200, n=80, k=4, ell=8, s=4, rate=0.3):
    """Sample mean of ``E_omega`` for the best fixed candidate and the expectation bound."""
    f = ScalarFunction.exp()
    spec = SpectrumSplit(exp_decay_spectrum(n, rate), k, f)
    E, (label, p, var) = best_candidate(spec, s)
    view = _in_variable(spec, var)
    vals = []
    for _ in range(draws):
        om = rng.standard_normal((n, ell))
        vals.append(E_omega_candidate(view, p, om[:k], om[k:]))
    bound = k / (ell - k - 1) * E * (1.0 + 3.0 / math.sqrt(draws))
    return float(np.mean(vals)), bound, label


def tail_quantile(rng, delta, draws=200, n=100, k=5, ell=9, s=5, r=4, rate=0.25):
    """Empirical ``(1 - delta)`` error quantile and the tail bound value."""
    f = ScalarFunction.exp()
    op = synthetic_spectrum_operator(exp_decay_spectrum(n, rate))
    F = np.diag(np.exp(exp_decay_spectrum(n, rate)))
    spec = SpectrumSplit(op.exact_spectrum, k, f)
    errs = []
    nF = np.linalg.norm(F)
    for _ in range(draws):
        a = krylov_aware(op, f, k, ell, s, r, omega=rng.standard_normal((n, ell)))
        errs.append(approx_error(a.truncate(k), F) * nF)
    q = float(np.quantile(errs, 1.0 - delta))
    return q, assemble_bound("thm35_tail", spec, ell, s, r, delta=delta).value


def cor_dominance(grid=None):
    """Worst ``cor42 - cor41`` over spectra with ``Gamma >= 0.5`` where both apply."""
    worst, count = -math.inf, 0
    f = ScalarFunction.exp()
    grid = grid or [(k, gap, width) for k in (2, 4) for gap in (1.0, 2.0, 4.0) for width in (1.0, 2.0)]
    for k, gap, width in grid:
        head = np.linspace(0.0, -0.5 * gap, k)
        tail = np.linspace(-1.5 * gap, -1.5 * gap - width, 40)
        spec = SpectrumSplit(np.concatenate([head, tail]), k, f)
        for s in range(4, 40, 3):
            try:
                a = assemble_bound("cor41", spec, k + 4, s, 3)
                b = assemble_bound("cor42", spec, k + 4, s, 3)
            except ValidationError:
                continue
            if b.notes["Gamma"] < 0.5:
                continue
            count += 1
            worst = max(worst, (b.value - a.value) / a.value)
    return worst, count


def check_bounds_monte_carlo(rng):
    out = []
    mean, bound, label = monte_carlo_E_omega(rng)
    out.append(_le("bounds.expected_E_omega", mean, bound, f"candidate {label}, 200 draws"))
    for delta in (0.1, 0.5):
        q, b = tail_quantile(rng, delta)
        out.append(_le(f"bounds.tail_quantile[delta={delta}]", q, b, "200 draws"))
    worst, count = cor_dominance()
    out.append(_le("bounds.cor42_le_cor41", worst, 1e-12, f"{count} grid points"))
    return out


# ---------------------------------------------------------------------------


def run_verification(suite="fast", seed=0, defl_tol=DEFLATION_TOL):
    """Run the invariant checks of every module.

    Parameters
    ----------
    suite : {"fast", "full"}
    seed : int
    defl_tol : float
        Deflation tolerance used by the nesting check's extended run. Raising
        it (for instance to ``1e-2``) is a negative control: the nesting
        check must then fail.

    Returns
    -------
    VerificationReport
    """
    if suite not in SUITES:
        raise ValidationError(f"suite must be one of {SUITES}, got {suite!r}")
    t0 = time.perf_counter()
    root = RngStream(seed, 0)
    checks = []
    checks += check_linalg(root.child(1).generator())
    checks += check_operators(root.child(2).generator())
    checks += check_lanczos(root.child(3).generator(), defl_tol=defl_tol)
    checks += check_lowrank(root.child(4).generator())
    checks += check_bounds(root.child(5).generator())
    if suite == "full":
        checks += check_bounds_monte_carlo(root.child(6).generator())
    return VerificationReport(suite, checks, time.perf_counter() - t0)

