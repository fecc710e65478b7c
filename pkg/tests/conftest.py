import numpy as np
import pytest

from noonforge import DensityMatrix, Mode, ModeUnitary, fock_basis


def haar_unitary(dim: int, rng: np.random.Generator) -> ModeUnitary:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return ModeUnitary(q * (d / np.abs(d)))


def random_density(dim_basis, rng: np.random.Generator) -> DensityMatrix:
    n = len(dim_basis)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = g @ g.conj().T
    m /= np.trace(m).real
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(dim_basis, m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def basis23():
    return fock_basis(2, 3)


@pytest.fixture
def basis34():
    return fock_basis(3, 4)
