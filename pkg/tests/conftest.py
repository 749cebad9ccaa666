import numpy as np
import pytest


def random_density_matrix(rng, dim):
    """Random full-rank density matrix (Wishart construction)."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_memoryless_draw(rng):
    """Random (z1, z2, g1, g2) over the scan ranges, z1 != z2."""
    z1, z2 = rng.uniform(-1.0, 1.0, 2)
    while abs(z1 - z2) < 1e-6:
        z2 = rng.uniform(-1.0, 1.0)
    g1, g2 = np.exp(rng.uniform(np.log(1e-2), np.log(1e3), 2))
    return float(z1), float(z2), float(g1), float(g2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
