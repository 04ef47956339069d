import numpy as np
import pytest

from povm_order.povm import validate


def qutrit_fixture():
    A = [np.array([[5, 0, 1], [0, 4, -1], [1, -1, 3]]) / 6,
         np.array([[1, 0, -1], [0, 2, 1], [-1, 1, 3]]) / 6]
    B = [np.array([[2, 0, 1], [0, 1, -1], [1, -1, 3]]) / 12,
         np.array([[4, -2, 1], [-2, 7, 1], [1, 1, 7]]) / 12,
         np.array([[3, 1, -1], [1, 2, 0], [-1, 0, 1]]) / 6]
    C = [np.array([[7, 0, 2], [0, 5, -2], [2, -2, 6]]) / 12,
         np.array([[1, -1, 0], [-1, 3, 1], [0, 1, 2]]) / 12,
         np.array([[5, 2, -1], [2, 4, 0], [-1, 0, 1]]) / 24,
         np.array([[3, 0, -3], [0, 4, 2], [-3, 2, 7]]) / 24]
    return validate(A, name="A"), validate(B, name="B"), validate(C, name="C")


@pytest.fixture
def qutrit():
    return qutrit_fixture()


def random_psd(rng, D, rank=None):
    rank = rank or D
    G = rng.standard_normal((D, rank)) + 1j * rng.standard_normal((D, rank))
    return G @ G.conj().T


def printed_qubit_fisher(k, eta, v3):
    """Closed-form 4x4 Fisher matrices of sigma_x, sigma_y, sigma_z dichotomics for rho = (I + v3 sigma_z)/2."""
    r = np.sqrt(1 - v3 ** 2)
    if k in (1, 2):
        sgn = 1 if k == 1 else -1
        return 0.5 * np.array([
            [1 + v3, 0, 0, r],
            [0, eta ** 2 * (1 - v3), sgn * eta ** 2 * r, 0],
            [0, sgn * eta ** 2 * r, eta ** 2 * (1 + v3), 0],
            [r, 0, 0, 1 - v3],
        ])
    den = np.sqrt(1 - eta ** 2 * v3 ** 2)
    a, b = (eta - eta * v3) / den, (eta + eta * v3) / den
    return 0.5 * np.array([
        [(1 + v3) * (a * a + 1), 0, 0, r * (1 - a * b)],
        [0, 0, 0, 0],
        [0, 0, 0, 0],
        [r * (1 - a * b), 0, 0, (1 - v3) * (b * b + 1)],
    ])


PAULI_AXES = {1: (1.0, 0.0, 0.0), 2: (0.0, 1.0, 0.0), 3: (0.0, 0.0, 1.0)}


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
