"""Dense kernels shared by every algorithm.

Everything here acts on small or medium dense arrays: projected matrices
``T``, core matrices ``X``, bases ``Q`` and desk-scale references.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, ResourceError, ValidationError

DENSE_CAP = 12000
DEFLATION_TOL = 1e-10
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns

    def reconstruct(self):
        V, lam = self.eigenvectors, self.eigenvalues
        return (V * lam) @ V.T


def check_symmetric(M, tol=SYMMETRY_TOL, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    scale = max(1.0, np.linalg.norm(M))
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > tol * scale:
        raise ValidationError(f"{name} is not symmetric (max |M - M^T| = {asym:.3e})")
    return M


def sym_eig(M, method="lapack", cap=DENSE_CAP, max_sweeps=50):
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    M : ndarray, shape (n, n)
        Symmetric input.
    method : {"lapack", "jacobi"}
        ``lapack`` calls the divide-and-conquer driver behind
        :func:`numpy.linalg.eigh`. ``jacobi`` runs cyclic Jacobi sweeps and
        is only practical for n in the low hundreds.
    cap : int
        Largest admissible ``n``.

    Returns
    -------
    SpectralDecomposition
        Eigenvalues in ascending order.
    """
    M = check_symmetric(M)
    n = M.shape[0]
    if n > cap:
        raise ResourceError(f"dense eigendecomposition of size {n} exceeds cap {cap}")
    if n == 0:
        return SpectralDecomposition(np.zeros(0), np.zeros((0, 0)))
    if method == "jacobi":
        lam, V = jacobi_eig(M, max_sweeps=max_sweeps)
    elif method == "lapack":
        lam, V = np.linalg.eigh(0.5 * (M + M.T))
    else:
        raise ValidationError(f"unknown eigensolver {method!r}")
    return SpectralDecomposition(lam, V)


def jacobi_eig(M, max_sweeps=50, rtol=1e-14):
    """Cyclic Jacobi with threshold skipping (Golub & Van Loan, 8.5).

    Sweeps stop once the off-diagonal Frobenius mass drops below
    ``rtol * ||M||_F``.
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    target = rtol * max(np.linalg.norm(A), np.finfo(float).tiny)
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(2.0) * np.linalg.norm(A[np.triu_indices(n, 1)])
        if off <= target:
            order = np.argsort(np.diag(A), kind="stable")
            return np.diag(A)[order].copy(), V[:, order]
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * target:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    raise NumericalError(f"Jacobi did not converge after {max_sweeps} sweeps")


def apply_matfun(M, f, eig=None):
    """Return ``V f(diag(lam)) V^T`` for symmetric ``M``.

    A precomputed :class:`SpectralDecomposition` may be passed as ``eig``.
    """
    if eig is None:
        eig = sym_eig(M)
    if eig.eigenvalues.size == 0:
        return np.zeros((0, 0))
    fl = np.asarray(f(eig.eigenvalues), dtype=float)
    V = eig.eigenvectors
    out = (V * fl) @ V.T
    return 0.5 * (out + out.T)


def truncate_sym(X, k):
    """Best rank-(at most)-k approximation of a symmetric matrix.

    Keeps the ``k`` eigenpairs of largest magnitude. Ties at the cut are
    resolved by a stable sort on ``-|lambda|``.
    """
    X = check_symmetric(X, tol=1e-10)
    if k < 0:
        raise ValidationError("k must be nonnegative")
    n = X.shape[0]
    if k >= n:
        return X.copy()
    if k == 0:
        return np.zeros_like(X)
    eig = sym_eig(X)
    keep = np.argsort(-np.abs(eig.eigenvalues), kind="stable")[:k]
    V = eig.eigenvectors[:, keep]
    out = (V * eig.eigenvalues[keep]) @ V.T
    return 0.5 * (out + out.T)


def orth_basis(Y, tol=DEFLATION_TOL, scale=None, against=None):
    """Orthonormal basis for ``range(Y)`` with deflation.

    Classical Gram-Schmidt, applied twice per column. A column is dropped
    when its residual after projection is at most ``tol * scale``.

    Parameters
    ----------
    Y : ndarray, shape (n, m)
    tol : float
        Relative deflation threshold.
    scale : float, optional
        Reference magnitude for ``tol``; defaults to ``||Y||_F``.
    against : ndarray, shape (n, p), optional
        Orthonormal columns that every new column is also projected
        against, so the result is orthogonal to them.

    Returns
    -------
    V : ndarray, shape (n, rank)
    R : ndarray, shape (rank, m)
        ``V^T Y``; upper trapezoidal in the staircase sense.
    rank : int
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, m = Y.shape
    if tol < 0:
        raise ValidationError("tol must be nonnegative")
    if scale is None:
        scale = np.linalg.norm(Y)
    thresh = tol * scale
    p = 0 if against is None else against.shape[1]
    V = np.empty((n, p + m))
    if p:
        V[:, :p] = against
    rank = 0
    for j in range(m):
        v = Y[:, j].copy()
        used = p + rank
        for _ in range(2):
            if used:
                v -= V[:, :used] @ (V[:, :used].T @ v)
        nv = np.linalg.norm(v)
        if nv == 0.0 or nv <= thresh:
            continue
        V[:, used] = v / nv
        rank += 1
    V = V[:, p:p + rank].copy()
    return V, V.T @ Y, rank


@dataclass(frozen=True)
class RngStream:
    """Reproducible source of Gaussian samples.

    Streams are Philox (counter-based) generators keyed by
    ``SeedSequence(seed, spawn_key=(stream_index,))``; distinct indices give
    statistically independent streams.
    """

    seed: int
    stream_index: int = 0

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index):
        return RngStream(self.seed, index)


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(0 if rng is None else int(rng)).generator()
    raise ValidationError(f"cannot draw samples from {type(rng).__name__}")


def gaussian_matrix(n, ell, rng):
    """``n x ell`` matrix of i.i.d. standard normals.

    An :class:`RngStream` always yields the same matrix; a
    :class:`numpy.random.Generator` is advanced.
    """
    if n < 1 or ell < 1:
        raise ValidationError("gaussian_matrix needs n, ell >= 1")
    return _as_generator(rng).standard_normal((n, ell))


def rel_error(exact, approx):
    exact = np.asarray(exact, dtype=float)
    approx = np.asarray(approx, dtype=float)
    if exact.shape != approx.shape:
        raise ValidationError(f"shape mismatch {exact.shape} vs {approx.shape}")
    nrm = np.linalg.norm(exact)
    if nrm == 0:
        raise DomainError("relative error undefined for a zero reference")
    return float(np.linalg.norm(exact - approx) / nrm)


def subspace_distance(A, B):
    """Largest principal angle between ``range(A)`` and ``range(B)``.

    Returns ``pi/2`` when the dimensions differ.
    """
    from scipy.linalg import subspace_angles

    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[1] != B.shape[1]:
        return float(np.pi / 2)
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(A, B)))
