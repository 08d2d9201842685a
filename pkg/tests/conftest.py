import numpy as np
import pytest

from qsslab import states


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_two_qubit(rng, rank=None):
    return states.random_density_from_rng((2, 2), rng, rank=rank)


def bell_projector(psi):
    return np.outer(psi, np.conj(psi))


def eq10_source(p1=0.5):
    """p1*Phi+ + (1-p1)*|01><01|."""
    m = p1 * bell_projector(states.PHI_PLUS) + (1 - p1) * bell_projector(
        states.basis_ket((0, 1), (2, 2))
    )
    return states.QuantumState(m, (2, 2))


def eq11_ancilla(lam2=0.5):
    """(1-lam2)*|11><11| + lam2*Psi+."""
    m = (1 - lam2) * bell_projector(states.basis_ket((1, 1), (2, 2))) + \
        lam2 * bell_projector(states.PSI_PLUS)
    return states.QuantumState(m, (2, 2))
