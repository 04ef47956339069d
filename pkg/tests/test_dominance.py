import numpy as np
import pytest
from conftest import random_psd

from povm_order import dominance as dm
from povm_order import morphisms as mo
from povm_order import povm as pv
from povm_order.errors import DimensionMismatch, NotPSD


def test_height_two_examples():
    assert np.isclose(dm.height_two(np.eye(3), np.eye(3)), 3)
    X = random_psd(np.random.default_rng(0), 4)
    assert np.isclose(dm.height_two(X, np.zeros((4, 4))), np.trace(X).real)
    Fx = mo.fisher(pv.make_qubit_dichotomic(1, [1, 0, 0]))
    Fz = mo.fisher(pv.make_qubit_dichotomic(1, [0, 0, 1]))
    assert np.isclose(dm.height_two(Fx, Fz), 3)
    with pytest.raises(DimensionMismatch):
        dm.height_two(np.eye(2), np.eye(3))


def test_two_matrix_certificate():
    rng = np.random.default_rng(1)
    X = [random_psd(rng, 4) - np.eye(4), random_psd(rng, 4, 2)]
    res = dm.height_two_result(*X)
    assert dm.check_result(X, res)["ok"]
    assert abs(res.gap) < 1e-9


def test_sdp_agrees_with_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(25):
        D = int(rng.integers(2, 7))
        X = [random_psd(rng, D, int(rng.integers(1, D + 1))) for _ in range(2)]
        res = dm.height_sdp(X)
        assert abs(res.value - dm.height_two(*X)) <= 1e-6
        assert res.gap <= 1e-6 * (1 + abs(res.value))
        assert dm.check_result(X, res)["ok"]


def test_sdp_handles_indefinite_inputs():
    rng = np.random.default_rng(3)
    G = rng.standard_normal((3, 3))
    X = [G + G.T, -(G + G.T)]
    res = dm.height_sdp(X)
    assert abs(res.value - dm.height_two(*X)) <= 1e-6
    assert dm.check_result(X, res)["ok"]


def test_single_and_orthogonal_supports():
    X = np.diag([1.0, 2.0, 0.0, 0.0])
    assert dm.height_sdp([X]).value == 3
    mats = [np.diag([1.0, 0, 0, 0]), np.diag([0, 2.0, 0, 0]), np.diag([0, 0, 0.5, 0])]
    assert abs(dm.height_sdp(mats).value - 3.5) <= 1e-6
    assert abs(dm.pgm_lower_bound(mats) - 3.5) <= 1e-9


def test_sandwich_and_monotonicity():
    rng = np.random.default_rng(4)
    for _ in range(8):
        D = int(rng.integers(2, 5))
        X = [random_psd(rng, D) for _ in range(3)]
        res = dm.height_sdp(X)
        lo, hi = dm.pgm_lower_bound(X), sum(np.trace(x).real for x in X)
        assert lo - 1e-6 <= res.value <= hi + 1e-6
        bigger = [x + random_psd(rng, D, 1) for x in X]
        assert res.value <= dm.height_sdp(bigger).value + 1e-6


def test_pgm_is_a_measurement():
    rng = np.random.default_rng(5)
    X = [random_psd(rng, 4, 1) for _ in range(2)]
    Y = dm.pretty_good_measurement(X)
    assert np.allclose(sum(Y), np.eye(4), atol=1e-9)
    assert all(np.linalg.eigvalsh(y)[0] >= -1e-9 for y in Y)
    with pytest.raises(NotPSD):
        dm.pgm_lower_bound([-np.eye(2), np.eye(2)])


def test_pgm_two_pauli_bound():
    F = [mo.fisher(pv.make_qubit_dichotomic(1, n)) for n in ([1, 0, 0], [0, 0, 1])]
    assert dm.pgm_lower_bound(F) <= dm.height_two(*F) + 1e-9


def test_factored_height_matches_dense():
    rng = np.random.default_rng(6)
    Ws = [rng.standard_normal((9, 2)) + 1j * rng.standard_normal((9, 2)) for _ in range(3)]
    X = [W @ W.conj().T for W in Ws]
    a, b = dm.height_factored(Ws), dm.height_sdp(X)
    assert abs(a.value - b.value) <= 1e-6
    assert dm.check_result(X, a)["ok"]


def test_against_cvxpy():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(7)
    X = [random_psd(rng, 3) for _ in range(3)]
    H = cp.Variable((3, 3), hermitian=True)
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(H))), [H - x >> 0 for x in X])
    prob.solve()
    assert abs(dm.height_sdp(X).value - prob.value) <= 1e-5 * (1 + prob.value)
