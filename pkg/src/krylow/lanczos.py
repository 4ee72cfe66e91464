"""Block Lanczos with full reorthogonalization and deflation.

Iteration ``i`` applies ``A`` to the block ``V_{i-1}``, so ``q`` iterations
cost ``sum(widths)`` matvecs (``q*ell`` without deflation) and return the
basis ``Q = [V_0 ... V_{q-1}]`` together with ``T = Q^T A Q``. The next
block ``V_q`` and coupling ``R_q`` are kept so a run can be continued.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .linalg import DEFLATION_TOL, orth_basis, sym_eig


@dataclass(frozen=True)
class BlockLanczosResult:
    """Output of :func:`block_lanczos`.

    Attributes
    ----------
    Q : ndarray, shape (n, d)
        Orthonormal basis of ``K_q(A, Omega)``.
    T : ndarray, shape (d, d)
        Block tridiagonal projection ``Q^T A Q``.
    R0 : ndarray, shape (w0, ell)
        ``Omega = V_0 R0``.
    widths : tuple of int
        Widths ``(w_0, ..., w_{q-1})`` of the basis blocks.
    iterations : int
    matvecs : int
        Columns pushed through the operator.
    """

    Q: np.ndarray
    T: np.ndarray
    R0: np.ndarray
    widths: tuple
    iterations: int
    matvecs: int
    defl_tol: float
    op_token: int = field(repr=False)
    _blocks: tuple = field(repr=False)  # V_0 .. V_q
    _M: tuple = field(repr=False)  # M_1 .. M_q
    _R: tuple = field(repr=False)  # R_1 .. R_q

    @property
    def dim(self):
        return self.Q.shape[1]

    @property
    def block_size(self):
        return self.R0.shape[1]

    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.widths)]).astype(int)


def _assemble_T(Ms, Rs):
    widths = [M.shape[0] for M in Ms]
    off = np.concatenate([[0], np.cumsum(widths)]).astype(int)
    T = np.zeros((off[-1], off[-1]))
    for i, M in enumerate(Ms):
        T[off[i]:off[i + 1], off[i]:off[i + 1]] = M
    for i, R in enumerate(Rs):
        # R_{i+1} couples block i+1 (rows) to block i (columns)
        T[off[i + 1]:off[i + 2], off[i]:off[i + 1]] = R
        T[off[i]:off[i + 1], off[i + 1]:off[i + 2]] = R.T
    return T


def _iterate(op, blocks, Ms, Rs, count, tol):
    matvecs = 0
    for _ in range(count):
        V = blocks[-1]
        if V.shape[1]:
            Y = op.apply(V)
            matvecs += V.shape[1]
            scale = np.linalg.norm(Y)
        else:
            Y = np.zeros((op.dim, 0))
            scale = 0.0
        if len(blocks) >= 2:
            Y -= blocks[-2] @ Rs[-1].T
        M = V.T @ Y
        M = 0.5 * (M + M.T)
        Y -= V @ M
        Qall = np.hstack(blocks)
        for _ in range(2):
            Y -= Qall @ (Qall.T @ Y)
        Vn, Rn, _ = orth_basis(Y, tol=tol, scale=scale, against=Qall)
        Ms.append(M)
        Rs.append(Rn)
        blocks.append(Vn)
    return matvecs


def _finish(blocks, Ms, Rs, R0, q, matvecs, tol, token):
    Q = np.hstack(blocks[:q]) if q else np.zeros((blocks[0].shape[0], 0))
    T = _assemble_T(Ms[:q], Rs[:q - 1])
    widths = tuple(b.shape[1] for b in blocks[:q])
    return BlockLanczosResult(Q=Q, T=T, R0=R0, widths=widths, iterations=q, matvecs=matvecs,
                              defl_tol=tol, op_token=token, _blocks=tuple(blocks),
                              _M=tuple(Ms), _R=tuple(Rs))


def block_lanczos(op, omega, q, defl_tol=DEFLATION_TOL):
    """Run ``q`` iterations of block Lanczos from the starting block ``omega``.

    Parameters
    ----------
    op : MatVecOperator
    omega : ndarray, shape (n, ell)
    q : int
        Number of iterations (block matvecs), ``q >= 1``.
    defl_tol : float
        Columns whose residual falls below ``defl_tol`` times the norm of
        the current block product are deflated.

    Returns
    -------
    BlockLanczosResult
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim == 1:
        omega = omega[:, None]
    if omega.shape[0] != op.dim:
        raise ValidationError(f"starting block has {omega.shape[0]} rows, operator has dimension {op.dim}")
    if q < 1:
        raise ValidationError("block Lanczos needs q >= 1")
    if omega.shape[1] < 1 or not np.any(omega):
        raise ValidationError("starting block must be nonzero")
    V0, R0, _ = orth_basis(omega, tol=defl_tol)
    blocks, Ms, Rs = [V0], [], []
    mv = _iterate(op, blocks, Ms, Rs, q, defl_tol)
    return _finish(blocks, Ms, Rs, R0, q, mv, defl_tol, op.token)


def extend_lanczos(res, op, extra):
    """Continue a run by ``extra`` iterations without redoing earlier work."""
    if op.token != res.op_token:
        raise ValidationError("extend_lanczos called with a different operator than the original run")
    if extra < 0:
        raise ValidationError("extra must be nonnegative")
    if extra == 0:
        return res
    blocks, Ms, Rs = list(res._blocks), list(res._M), list(res._R)
    mv = _iterate(op, blocks, Ms, Rs, extra, res.defl_tol)
    return _finish(blocks, Ms, Rs, res.R0, res.iterations + extra, res.matvecs + mv,
                   res.defl_tol, res.op_token)


def leading_principal(res, s):
    """First ``d = w_0 + ... + w_{s-1}`` basis columns and ``d``."""
    if not 1 <= s <= res.iterations:
        raise ValidationError(f"s must lie in [1, {res.iterations}], got {s}")
    d = int(sum(res.widths[:s]))
    return res.Q[:, :d], d


def matfun_T(res, f):
    """``f(T)`` through a dense eigendecomposition of ``T``."""
    eig = sym_eig(res.T)
    fl = np.asarray(f(eig.eigenvalues), dtype=float)
    V = eig.eigenvectors
    out = (V * fl) @ V.T
    return 0.5 * (out + out.T)


def _fT_leading_columns(res, f):
    eig = sym_eig(res.T)
    fl = np.asarray(f(eig.eigenvalues), dtype=float)
    w0 = res.widths[0]
    V = eig.eigenvectors
    return (V * fl) @ V[:w0].T


def lanczos_fom(res, f):
    """Block-FOM approximation ``Q f(T)[:, :w0] R0`` of ``f(A) Omega``."""
    return res.Q @ (_fT_leading_columns(res, f) @ res.R0)


def lanczos_quadform(res, f):
    """Block Gauss quadrature ``R0^T f(T)[:w0, :w0] R0`` of ``Omega^T f(A) Omega``."""
    w0 = res.widths[0]
    F = _fT_leading_columns(res, f)[:w0]
    out = res.R0.T @ F @ res.R0
    return 0.5 * (out + out.T)
