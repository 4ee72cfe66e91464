import threading

import numpy as np
import pytest

from conftest import ghost_node_laplacian, pauli_hamiltonian, random_symmetric
from krylow.errors import ResourceError, ValidationError
from krylow.functions import ScalarFunction
from krylow.lanczos import block_lanczos
from krylow.linalg import subspace_distance
from krylow.operators import (
    MAX_SPINS,
    dense_operator,
    exact_matfun_reference,
    exp_decay_spectrum,
    identity_operator,
    inverse_square_log_spectrum,
    laplacian2d_operator,
    reference_eig,
    shifted_operator,
    sparse_operator,
    spin_chain_operator,
    synthetic_spectrum_operator,
)


def all_ops(rng):
    return [
        laplacian2d_operator(7, 0.01, 1.0),
        spin_chain_operator(5, 0.8),
        synthetic_spectrum_operator(inverse_square_log_spectrum(60)),
        dense_operator(random_symmetric(rng, 30)),
        sparse_operator(np.diag(np.arange(1.0, 6.0)) + np.diag(np.ones(4), 1) + np.diag(np.ones(4), -1)),
    ]


def test_linearity_and_symmetry_probes(rng):
    for op in all_ops(rng):
        a_est = op.norm_estimate()
        for _ in range(20):
            X, Y = rng.standard_normal((op.dim, 2)), rng.standard_normal((op.dim, 2))
            a, b = rng.standard_normal(2)
            lhs = op.apply(a * X + b * Y)
            rhs = a * op.apply(X) + b * op.apply(Y)
            assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)
            u, v = X[:, 0], Y[:, 0]
            assert abs(u @ op.apply(v) - v @ op.apply(u)) <= 1e-10 * a_est * np.linalg.norm(u) * np.linalg.norm(v)


def test_zero_block(rng):
    for op in all_ops(rng):
        assert not np.any(op.apply(np.zeros((op.dim, 3))))


class TestLaplacian:
    def test_full_scale_dimension(self):
        assert laplacian2d_operator(100, 0.01, 1.0).dim == 9900

    def test_matches_node_assembly(self):
        op = laplacian2d_operator(5, 0.01, 1.0)
        assert op.dim == 20
        L = ghost_node_laplacian(5, 0.01, 1.0)
        # the mirrored top edge is symmetrized by scaling top nodes by 1/sqrt(2)
        s = np.ones(20)
        s[4::5] = 1 / np.sqrt(2)
        np.testing.assert_allclose(op.to_dense(), (s[:, None] * L) / s[None, :], atol=1e-13)

    def test_spectrum_matches_assembly(self):
        L = ghost_node_laplacian(6, 0.3, -2.0)
        op = laplacian2d_operator(6, 0.3, -2.0)
        lam = np.sort(np.linalg.eigvals(L).real)
        np.testing.assert_allclose(op.exact_spectrum, lam, atol=1e-10 * np.abs(lam).max())

    @pytest.mark.parametrize("grid,kappa", [(2, 0.01), (5.5, 0.01), (5, 0.0)])
    def test_invalid(self, grid, kappa):
        with pytest.raises(ValidationError):
            laplacian2d_operator(grid, kappa)

    def test_matfun_reference_square(self):
        op = laplacian2d_operator(5)
        A = op.to_dense()
        np.testing.assert_allclose(exact_matfun_reference(op, ScalarFunction.polynomial([0, 0, 1])), A @ A,
                                   rtol=1e-10, atol=1e-10 * np.linalg.norm(A @ A))


class TestSpinChain:
    def test_dimension(self):
        assert spin_chain_operator(14).dim == 2**14

    def test_single_site(self):
        op = spin_chain_operator(1, 2.5)
        np.testing.assert_allclose(op.to_dense(), [[0.0, -2.5], [-2.5, 0.0]])
        np.testing.assert_allclose(np.linalg.eigvalsh(op.to_dense()), [-2.5, 2.5])

    @pytest.mark.parametrize("N,h", [(2, 0.5), (3, 1.0), (4, 10.0)])
    def test_kronecker_assembly(self, N, h):
        np.testing.assert_allclose(spin_chain_operator(N, h).to_dense(), pauli_hamiltonian(N, h), atol=1e-14)

    def test_identity_reference(self):
        got = exact_matfun_reference(spin_chain_operator(3, 0.7), ScalarFunction.identity())
        np.testing.assert_allclose(got, pauli_hamiltonian(3, 0.7), atol=1e-13)

    def test_block_equals_columns(self, rng):
        op = spin_chain_operator(7, 0.3)
        X = rng.standard_normal((op.dim, 4))
        cols = np.column_stack([op.apply(X[:, j]) for j in range(4)])
        assert np.array_equal(op.apply(X), cols)

    @pytest.mark.parametrize("N", [0, MAX_SPINS + 1])
    def test_range(self, N):
        with pytest.raises(ValidationError):
            spin_chain_operator(N)


class TestSynthetic:
    def test_log_spectrum(self):
        lam = inverse_square_log_spectrum(5000)
        i = np.arange(1, 5001)
        # log(exp(x)) near 1 is limited by the absolute spacing of doubles at 1.0
        np.testing.assert_allclose(ScalarFunction.log()(lam), 1.0 / i**2, rtol=1e-12, atol=2.3e-16)

    def test_identity(self, rng):
        op = identity_operator(6)
        X = rng.standard_normal((6, 2))
        np.testing.assert_array_equal(op.apply(X), X)

    def test_basis_vector(self, rng):
        lam = rng.standard_normal(9)
        op = synthetic_spectrum_operator(lam)
        for j in range(9):
            e = np.zeros(9)
            e[j] = 1.0
            np.testing.assert_array_equal(op.apply(e), lam[j] * e)

    def test_exp_reference(self):
        lam = exp_decay_spectrum(6, 0.5)
        np.testing.assert_allclose(exact_matfun_reference(synthetic_spectrum_operator(lam), ScalarFunction.exp()),
                                   np.diag(np.exp(lam)), atol=1e-15)

    def test_empty(self):
        with pytest.raises(ValidationError):
            synthetic_spectrum_operator([])


class TestOperatorBehaviour:
    def test_counter(self, rng):
        op = laplacian2d_operator(5)
        op.apply(rng.standard_normal((op.dim, 3)))
        op.apply(rng.standard_normal(op.dim))
        assert op.matvecs == 4
        view = op.counting_view()
        view.apply(np.zeros((op.dim, 2)))
        assert view.matvecs == 2 and op.matvecs == 4
        op.reset_count()
        assert op.matvecs == 0

    def test_counter_threads(self):
        op = synthetic_spectrum_operator(np.ones(10))
        X = np.ones((10, 3))

        def work():
            for _ in range(200):
                op.apply(X)

        ts = [threading.Thread(target=work) for _ in range(4)]
        for t in ts:
            t.start()
        for t in ts:
            t.join()
        assert op.matvecs == 4 * 200 * 3

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            identity_operator(3).apply(np.ones(4))

    def test_dense_cap(self):
        op = laplacian2d_operator(10)
        with pytest.raises(ResourceError, match="dense_cap"):
            op.to_dense(cap=50)
        with pytest.raises(ResourceError):
            reference_eig(op, cap=50)

    def test_sparse_nonsymmetric(self):
        with pytest.raises(ValidationError):
            sparse_operator(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_dense_nonsymmetric(self):
        with pytest.raises(ValidationError):
            dense_operator(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_shift_preserves_krylov_span(self, rng):
        for op in all_ops(rng)[:3]:
            om = rng.standard_normal((op.dim, 2))
            for c in (-5.0, 3.0):
                sh = shifted_operator(op, c)
                assert subspace_distance(block_lanczos(op, om, 4).Q, block_lanczos(sh, om, 4).Q) <= 1e-8

    def test_shift_spectrum(self):
        op = synthetic_spectrum_operator([1.0, 2.0])
        np.testing.assert_allclose(shifted_operator(op, 1.5).exact_spectrum, [-0.5, 0.5])
