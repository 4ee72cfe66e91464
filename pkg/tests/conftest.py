import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def random_symmetric(rng, n, scale=1.0):
    B = rng.standard_normal((n, n))
    S = B + B.T
    return scale * S / np.linalg.norm(S, 2)


def pauli_hamiltonian(N, h):
    """Dense transverse-field Ising Hamiltonian from explicit Kronecker products."""
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    Z = np.array([[1.0, 0.0], [0.0, -1.0]])
    eye = np.eye(2)

    def site(P, i):
        out = np.ones((1, 1))
        for j in range(N):
            out = np.kron(out, P if j == i else eye)
        return out

    H = np.zeros((2**N, 2**N))
    for i in range(N - 1):
        H -= site(Z, i) @ site(Z, i + 1)
    for i in range(N):
        H -= h * site(X, i)
    return H


def ghost_node_laplacian(N, kappa, lam):
    """Nonsymmetric five-point matrix with the top edge mirrored, assembled node by node."""
    nx, ny = N - 1, N
    n = nx * ny
    L = np.zeros((n, n))
    h2 = float(N) ** 2
    for i in range(nx):
        for j in range(ny):
            row = i * ny + j
            L[row, row] = -4.0
            if i > 0:
                L[row, row - ny] += 1.0
            if i < nx - 1:
                L[row, row + ny] += 1.0
            if j > 0:
                L[row, row - 1] += 1.0
            if j < ny - 1:
                L[row, row + 1] += 1.0
            else:
                # ghost node above the top edge mirrors the node below
                L[row, row - 1] += 1.0
    return kappa * h2 * L + lam * np.eye(n)
