"""Matrix-free symmetric operators and a dense reference path."""

from __future__ import annotations

import itertools
import threading

import numpy as np

from .errors import ResourceError, ValidationError
from .functions import ScalarFunction
from .linalg import DENSE_CAP, apply_matfun, check_symmetric, sym_eig

_tokens = itertools.count(1)


class MatVecOperator:
    """A symmetric linear operator known only through block products.

    Parameters
    ----------
    dim : int
        Dimension ``n``.
    apply_block : callable
        Maps an ``(n, m)`` array to ``A @ X``.
    label : str
    exact_spectrum : array_like, optional
        Eigenvalues when they are known in closed form.

    Notes
    -----
    Every column pushed through :meth:`apply` is counted in
    :attr:`matvecs`; the counter is guarded by a lock so concurrent callers
    see a consistent total.
    """

    def __init__(self, dim, apply_block, label="operator", exact_spectrum=None, dense=None):
        if int(dim) < 1:
            raise ValidationError("operator dimension must be positive")
        self.dim = int(dim)
        self._apply = apply_block
        self.label = label
        self.exact_spectrum = None if exact_spectrum is None else np.sort(np.asarray(exact_spectrum, float))
        self._dense = dense
        self.token = next(_tokens)
        self._count = 0
        self._lock = threading.Lock()

    def __repr__(self):
        return f"MatVecOperator({self.label!r}, n={self.dim})"

    @property
    def shape(self):
        return (self.dim, self.dim)

    @property
    def matvecs(self):
        return self._count

    def reset_count(self):
        with self._lock:
            self._count = 0

    def apply(self, X):
        """Return ``A @ X`` for a vector or block ``X``."""
        X = np.asarray(X, dtype=float)
        vec = X.ndim == 1
        if vec:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != self.dim:
            raise ValidationError(f"operator of size {self.dim} cannot act on shape {X.shape}")
        with self._lock:
            self._count += X.shape[1]
        if X.shape[1] == 0:
            Y = np.zeros_like(X)
        else:
            Y = np.asarray(self._apply(X), dtype=float)
        return Y[:, 0] if vec else Y

    __matmul__ = apply

    def to_dense(self, cap=DENSE_CAP, chunk=512):
        """Materialize ``A`` by applying it to identity blocks."""
        n = self.dim
        if n > cap:
            raise ResourceError(
                f"materializing {self.label} needs a {n}x{n} dense matrix, above the cap {cap}; "
                "use a smaller configuration or raise dense_cap"
            )
        if self._dense is not None:
            return np.array(self._dense, dtype=float)
        M = np.empty((n, n))
        for start in range(0, n, chunk):
            stop = min(n, start + chunk)
            E = np.zeros((n, stop - start))
            E[np.arange(start, stop), np.arange(stop - start)] = 1.0
            M[:, start:stop] = self._apply(E)
        return 0.5 * (M + M.T)

    def counting_view(self):
        """A copy that shares the action but keeps its own matvec counter."""
        view = MatVecOperator(self.dim, self._apply, label=self.label,
                              exact_spectrum=self.exact_spectrum, dense=self._dense)
        if hasattr(self, "sparse"):
            view.sparse = self.sparse
        return view

    def norm_estimate(self, iters=30, seed=0):
        """Spectral-norm estimate from the exact spectrum or power iteration."""
        if self.exact_spectrum is not None:
            return float(np.max(np.abs(self.exact_spectrum)))
        x = np.random.default_rng(seed).standard_normal(self.dim)
        x /= np.linalg.norm(x)
        est = 0.0
        for _ in range(iters):
            y = self._apply(x[:, None])[:, 0]
            est = np.linalg.norm(y)
            if est == 0:
                return 0.0
            x = y / est
        return float(est)


def dense_operator(M, label="dense"):
    M = check_symmetric(np.array(M, dtype=float), name=label)
    M = 0.5 * (M + M.T)
    return MatVecOperator(M.shape[0], lambda X: M @ X, label=label, dense=M)


def shifted_operator(op, c):
    """The operator ``A - c I``; Krylov spaces are unchanged by the shift."""
    c = float(c)
    spec = None if op.exact_spectrum is None else op.exact_spectrum - c
    return MatVecOperator(op.dim, lambda X: op._apply(X) - c * X, label=f"{op.label}-{c:g}I",
                          exact_spectrum=spec)


def identity_operator(n):
    return synthetic_spectrum_operator(np.ones(int(n)), label=f"identity({n})")


def laplacian2d_operator(grid_points_per_side, kappa=0.01, lam=1.0):
    """Five-point discretization of ``kappa*Laplace + lam*I`` on the unit square.

    Spacing is ``h = 1/N`` with ``N = grid_points_per_side``. The left,
    right and bottom edges carry homogeneous Dirichlet conditions and drop
    out of the unknowns; the top edge is Neumann and is handled with a
    mirrored ghost node. This leaves ``(N-1)*N`` unknowns ordered
    ``i*N + j`` with ``i`` the x-index and ``j`` the y-index.
    """
    N = int(grid_points_per_side)
    if N != grid_points_per_side or N < 3:
        raise ValidationError("grid_points_per_side must be an integer >= 3")
    if not kappa > 0:
        raise ValidationError("kappa must be positive")
    nx, ny = N - 1, N
    h2 = float(N) ** 2
    r2 = np.sqrt(2.0)
    kappa, lam = float(kappa), float(lam)

    def apply(X):
        m = X.shape[1]
        U = X.reshape(nx, ny, m)
        Y = -4.0 * U
        Y[1:] += U[:-1]
        Y[:-1] += U[1:]
        Y[:, 1:-1] += U[:, :-2]
        Y[:, :-2] += U[:, 1:-1]
        Y[:, -1] += r2 * U[:, -2]
        Y[:, -2] += r2 * U[:, -1]
        return (kappa * h2) * Y.reshape(nx * ny, m) + lam * X

    p = np.arange(1, nx + 1)
    q = np.arange(1, ny + 1)
    ex = -4.0 * h2 * np.sin(p * np.pi / (2 * N)) ** 2
    ey = -4.0 * h2 * np.sin((2 * q - 1) * np.pi / (4 * N)) ** 2
    spectrum = lam + kappa * (ex[:, None] + ey[None, :]).ravel()
    return MatVecOperator(nx * ny, apply, label=f"laplacian2d(N={N},kappa={kappa:g},lambda={lam:g})",
                          exact_spectrum=spectrum)


MAX_SPINS = 24


def spin_chain_operator(N, h=1.0):
    """Transverse-field Ising chain ``-sum Z_i Z_{i+1} - h sum X_i``.

    Site ``i`` (0-based) is bit ``N-1-i`` of the state index, matching the
    Kronecker ordering ``P_0 (x) P_1 (x) ... (x) P_{N-1}``.
    """
    N = int(N)
    if not 1 <= N <= MAX_SPINS:
        raise ValidationError(f"spin count must lie in [1, {MAX_SPINS}], got {N}")
    h = float(h)
    n = 2**N
    idx = np.arange(n)
    diag = np.zeros(n)
    prev = None
    for i in range(N):
        z = 1.0 - 2.0 * ((idx >> (N - 1 - i)) & 1)
        if prev is not None:
            diag -= prev * z
        prev = z

    def apply(X):
        m = X.shape[1]
        Y = diag[:, None] * X
        if h != 0.0:
            S = np.zeros_like(X)
            for i in range(N):
                V = X.reshape(2**i, 2, 2 ** (N - 1 - i), m)
                S += V[:, ::-1].reshape(n, m)
            Y -= h * S
        return Y

    return MatVecOperator(n, apply, label=f"spin_chain(N={N},h={h:g})")


def exp_decay_spectrum(n, rate=0.1):
    """``lambda_i = -rate * (i - 1)``, so ``exp(lambda_i)`` decays geometrically."""
    return -float(rate) * np.arange(int(n), dtype=float)


def synthetic_spectrum_operator(eigenvalues, label=None):
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if lam.size == 0:
        raise ValidationError("spectrum must be nonempty")

    def apply(X):
        return lam[:, None] * X

    return MatVecOperator(lam.size, apply, label=label or f"synthetic(n={lam.size})",
                          exact_spectrum=lam.copy())


def inverse_square_log_spectrum(n):
    """``lambda_i = exp(1/i^2)``, so that ``log(lambda_i) = 1/i^2``."""
    i = np.arange(1, int(n) + 1, dtype=float)
    return np.exp(1.0 / i**2)


def sparse_operator(S, label="sparse"):
    import scipy.sparse as sp

    S = sp.csr_matrix(S, dtype=float)
    if S.shape[0] != S.shape[1]:
        raise ValidationError("sparse operator must be square")
    if abs(S - S.T).max() > 1e-12 * max(1.0, abs(S).max()) if S.nnz else False:
        raise ValidationError("sparse operator is not symmetric")
    S.sort_indices()

    def apply(X):
        return np.asarray(S @ X)

    op = MatVecOperator(S.shape[0], apply, label=label)
    op.sparse = S
    return op


def adjacency_from_matrix_market(path):
    from .matrix_market import read_matrix_market

    S = read_matrix_market(path)
    return sparse_operator(S, label=f"adjacency({path})")


def exact_matfun_reference(op, f: ScalarFunction, cap=DENSE_CAP, eig=None):
    """Dense ``f(A)`` for error measurement.

    ``eig`` may carry a decomposition of ``A`` computed earlier.
    """
    if eig is None:
        eig = reference_eig(op, cap=cap)
    return apply_matfun(None, f, eig=eig)


def reference_eig(op, cap=DENSE_CAP):
    if op.dim > cap:
        raise ResourceError(
            f"dense reference for {op.label} (n={op.dim}) exceeds cap {cap}; "
            "use a smaller configuration or raise dense_cap"
        )
    return sym_eig(op.to_dense(cap=cap), cap=cap)
