"""Low-rank approximations of ``f(A)``.

Four estimators share one output type, :class:`LowRankApprox`, which holds
the factors of ``basis @ core @ basis.T``:

* :func:`rand_svd_exact`, randomized SVD with exact products by ``f(A)``
  (a reference that is not available in practice);
* :func:`rand_svd_matfun`, randomized SVD where both products with ``f(A)``
  are replaced by independent block Lanczos runs;
* :func:`krylov_aware`, which keeps the whole Krylov basis and obtains the
  core from one longer Lanczos run (``r = 0`` gives the direct variant);
* :func:`single_vector_krylov_aware`, the same idea started from one vector.

Every estimator accepts an explicit starting block ``omega`` so that
methods can be compared on the same Gaussian sketch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BreakdownError, ValidationError
from .lanczos import block_lanczos, lanczos_fom, lanczos_quadform, leading_principal, matfun_T
from .linalg import DEFLATION_TOL, check_symmetric, gaussian_matrix, orth_basis, truncate_sym


@dataclass(frozen=True)
class LowRankApprox:
    """Factored symmetric approximation ``basis @ core @ basis.T``.

    Attributes
    ----------
    basis : ndarray, shape (n, d)
        Orthonormal columns.
    core : ndarray, shape (d, d)
    truncated_to : int or None
        ``k`` when the core has been replaced by its best rank-k part.
    method_tag : str
    matvec_count : int
        Matvecs with ``A``. Exact products with ``f(A)`` are not counted.
    """

    basis: np.ndarray
    core: np.ndarray
    truncated_to: int | None
    method_tag: str
    matvec_count: int

    @property
    def dim(self):
        return self.basis.shape[1]

    def truncate(self, k):
        """Return the approximation with core ``[[core]]_k``.

        Raises
        ------
        BreakdownError
            If the basis has fewer than ``k`` columns.
        """
        if k < 1:
            raise ValidationError("truncation rank must be at least 1")
        if self.dim < k:
            raise BreakdownError(
                f"{self.method_tag}: basis dimension {self.dim} is smaller than the requested rank {k}",
                achieved=self.dim,
            )
        return replace(self, core=truncate_sym(self.core, k), truncated_to=int(k))

    def dense(self):
        out = self.basis @ self.core @ self.basis.T
        return 0.5 * (out + out.T)

    def matvec(self, X):
        return self.basis @ (self.core @ (self.basis.T @ X))


def _omega(op_dim, ell, rng, omega):
    if omega is not None:
        omega = np.asarray(omega, dtype=float)
        if omega.ndim == 1:
            omega = omega[:, None]
        if omega.shape != (op_dim, ell):
            raise ValidationError(f"omega must have shape {(op_dim, ell)}, got {omega.shape}")
        return omega
    if rng is None:
        raise ValidationError("either rng or omega must be given")
    return gaussian_matrix(op_dim, ell, rng)


def _check_counts(k, ell, need_ell_ge_k=True):
    if k < 1 or ell < 1:
        raise ValidationError("k and ell must be positive")
    if need_ell_ge_k and ell < k:
        raise ValidationError(f"block size ell={ell} must be at least k={k}")


def _finish(approx, k, truncate):
    return approx.truncate(k) if truncate else approx


def rand_svd_exact(f_of_A, k, ell, rng=None, omega=None, truncate=False, defl_tol=DEFLATION_TOL):
    """Randomized SVD of an explicitly available symmetric ``f(A)``.

    Parameters
    ----------
    f_of_A : ndarray, shape (n, n)
    k, ell : int
        Target rank and sketch size, ``ell >= k``.
    rng : RngStream or numpy.random.Generator, optional
    omega : ndarray, shape (n, ell), optional
        Sketch to use instead of drawing one.
    truncate : bool
        Return ``W [[X]]_k W^T`` instead of ``W X W^T``.
    """
    B = check_symmetric(f_of_A, tol=1e-10, name="f(A)")
    _check_counts(k, ell)
    Om = _omega(B.shape[0], ell, rng, omega)
    W, _, _ = orth_basis(B @ Om, tol=defl_tol)
    X = W.T @ B @ W
    X = 0.5 * (X + X.T)
    approx = LowRankApprox(W, X, None, "rand_svd_exact", 0)
    return _finish(approx, k, truncate)


def rand_svd_matfun(op, f, k, ell, s, r, rng=None, omega=None, truncate=False, defl_tol=DEFLATION_TOL):
    """Randomized SVD on ``f(A)`` with Lanczos-approximated products.

    ``s`` iterations approximate ``K = f(A) Omega``; an independent run of
    ``r`` iterations started from ``W = orth(K)`` approximates
    ``W^T f(A) W``. Costs ``(s + r) * ell`` matvecs without deflation.
    """
    _check_counts(k, ell)
    if s < 1 or r < 1:
        raise ValidationError("rand_svd_matfun needs s >= 1 and r >= 1")
    Om = _omega(op.dim, ell, rng, omega)
    inner = block_lanczos(op, Om, s, defl_tol=defl_tol)
    K = lanczos_fom(inner, f)
    W, _, w = orth_basis(K, tol=defl_tol)
    if w == 0:
        raise BreakdownError("Lanczos estimate of f(A) Omega vanished", achieved=0)
    outer = block_lanczos(op, W, r, defl_tol=defl_tol)
    X = lanczos_quadform(outer, f)
    approx = LowRankApprox(W, X, None, "rand_svd_matfun", inner.matvecs + outer.matvecs)
    return _finish(approx, k, truncate)


def krylov_aware(op, f, k, ell, s, r, rng=None, omega=None, truncate=False, defl_tol=DEFLATION_TOL):
    """Krylov-aware approximation ``Q_s X Q_s^T``.

    One block Lanczos run of ``q = s + r`` iterations gives ``Q_s`` (first
    ``s`` blocks) and ``X = f(T_q)[:d, :d]`` with ``d = dim K_s(A, Omega)``.
    With ``r = 0`` this is the direct projection ``Q_s f(T_s) Q_s^T``.
    ``ell < k`` is allowed as long as ``d >= k`` when truncating.
    """
    if k < 1 or ell < 1:
        raise ValidationError("k and ell must be positive")
    if s < 1 or r < 0:
        raise ValidationError("krylov_aware needs s >= 1 and r >= 0")
    Om = _omega(op.dim, ell, rng, omega)
    res = block_lanczos(op, Om, s + r, defl_tol=defl_tol)
    Qs, d = leading_principal(res, s)
    X = matfun_T(res, f)[:d, :d]
    tag = "krylov_aware_direct" if r == 0 else "krylov_aware"
    approx = LowRankApprox(Qs, X, None, tag, res.matvecs)
    return _finish(approx, k, truncate)


def single_vector_krylov_aware(op, f, k, s, r, rng=None, omega=None, truncate=False,
                               defl_tol=DEFLATION_TOL):
    """Krylov-aware approximation started from one Gaussian vector.

    Runs ``k + s + r`` single-vector Lanczos iterations and keeps the
    basis of ``K_{k+s}(A, omega)``.
    """
    if k < 1:
        raise ValidationError("k must be positive")
    if s < 0 or r < 0:
        raise ValidationError("s and r must be nonnegative")
    w = _omega(op.dim, 1, rng, omega)
    res = block_lanczos(op, w, k + s + r, defl_tol=defl_tol)
    Q, d = leading_principal(res, k + s)
    X = matfun_T(res, f)[:d, :d]
    approx = LowRankApprox(Q, X, None, "single_vector_krylov_aware", res.matvecs)
    return _finish(approx, k, truncate)


def approx_error(approx, reference, method="blocked", chunk=1024):
    """Relative Frobenius error ``||F - Q X Q^T||_F / ||F||_F``.

    Parameters
    ----------
    approx : LowRankApprox
    reference : ndarray, shape (n, n)
    method : {"blocked", "identity", "dense"}
        ``blocked`` accumulates the residual over row chunks and never
        forms the ``n x n`` approximant. ``identity`` expands
        ``||F||^2 - 2 tr(X^T Q^T F Q) + ||X||^2``, which is cheaper but
        loses digits when the error is small. ``dense`` forms everything.
    """
    F = np.asarray(reference)
    Q, X = approx.basis, approx.core
    n = Q.shape[0]
    if F.shape != (n, n):
        raise ValidationError(f"reference shape {F.shape} does not match basis with {n} rows")
    nF = np.linalg.norm(F)
    if nF == 0:
        raise ValidationError("reference has zero norm")
    if method == "dense":
        return float(np.linalg.norm(F - approx.dense()) / nF)
    if method == "identity":
        G = Q.T @ F @ Q
        sq = nF**2 - 2.0 * np.sum(X * G) + np.sum(X * X)
        return float(np.sqrt(max(sq, 0.0)) / nF)
    if method != "blocked":
        raise ValidationError(f"unknown error method {method!r}")
    QX = Q @ X
    total = 0.0
    for i in range(0, n, chunk):
        D = F[i:i + chunk] - QX[i:i + chunk] @ Q.T
        total += np.sum(D * D)
    return float(np.sqrt(total) / nF)
