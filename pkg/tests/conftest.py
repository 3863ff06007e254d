import numpy as np
import pytest

from qedlab import exact, grid, modes


@pytest.fixture(scope="session")
def dgrid():
    """Small dirichlet box used across unit tests (fast, converged enough)."""
    return grid.build_grid(121, 0.25, "dirichlet")


@pytest.fixture(scope="session")
def dpot(dgrid):
    return grid.soft_coulomb(dgrid, 1.0)


@pytest.fixture(scope="session")
def resonance(dgrid, dpot):
    return exact.resonance_frequency(dgrid, dpot)


@pytest.fixture(scope="session")
def pgrid():
    """Periodic grid of the displaced-basis benchmarks."""
    return grid.build_grid(31, 1.5, "periodic")


@pytest.fixture(scope="session")
def ppot(pgrid):
    return grid.soft_coulomb(pgrid, 1.0)


@pytest.fixture(scope="session")
def bare_energy(dgrid, dpot):
    """Dense-diagonalization oracle for the bare matter ground state."""
    h = exact.matter_hamiltonian(dgrid, dpot).toarray()
    return float(np.linalg.eigvalsh(h)[0])


def make_mode(omega=0.4, lam=0.1, n_electrons=1):
    return modes.single_mode(omega, lam, n_electrons)
