import numpy as np
import pytest

from povm_order import hermitian as hm
from povm_order.errors import DimNotSquare, NotHermitian, NotPSD


def test_check_hermitian_rejects_and_symmetrises():
    with pytest.raises(NotHermitian):
        hm.check_hermitian([[0, 1], [0, 0]])
    M = hm.check_hermitian(np.array([[1, 1j], [-1j + 1e-12, 2]]))
    assert np.array_equal(M, M.conj().T)


def test_shape_errors():
    with pytest.raises(DimNotSquare):
        hm.as_matrix(np.zeros((2, 3)))
    with pytest.raises(DimNotSquare):
        hm.unvectorize(np.zeros(5))


def test_eig_reconstructs():
    rng = np.random.default_rng(0)
    G = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    M = G + G.conj().T
    w, V = hm.eig_hermitian(M)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(V @ np.diag(w) @ V.conj().T, M, atol=1e-12)
    assert np.allclose(V.conj().T @ V, np.eye(5), atol=1e-12)


def test_sqrt_and_pinv_sqrt():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    M = G @ G.conj().T
    R = hm.sqrt_psd(M)
    assert np.allclose(R @ R, M, atol=1e-10)
    T = hm.pinv_sqrt(M)
    assert np.allclose(T @ M @ T, hm.support_projector(M), atol=1e-10)
    assert hm.support_basis(M).shape == (4, 2)
    with pytest.raises(NotPSD):
        hm.sqrt_psd(-np.eye(2))


def test_vectorize_is_column_major():
    E = np.arange(9).reshape(3, 3)
    v = hm.vectorize(E)
    assert v[1] == E[1, 0] and v[3] == E[0, 1]
    assert np.array_equal(hm.unvectorize(v), E)
    # vec(|a><b|) = conj(b) (x) a
    a, b = np.array([1, 2j]), np.array([3, 1 - 1j])
    assert np.allclose(hm.vectorize(np.outer(a, b.conj())), np.kron(b.conj(), a))


def test_vec_of_sandwich():
    rng = np.random.default_rng(2)
    A, X, B = (rng.standard_normal((3, 3)) for _ in range(3))
    assert np.allclose(hm.vectorize(A @ X @ B), np.kron(B.T, A) @ hm.vectorize(X))


def test_partial_trace_and_transpose():
    rng = np.random.default_rng(3)
    X, Y = rng.standard_normal((2, 2)), rng.standard_normal((3, 3))
    T = np.kron(X, Y)
    assert np.allclose(hm.partial_trace(T, (2, 3), keep=0), X * np.trace(Y))
    assert np.allclose(hm.partial_trace(T, (2, 3), keep=1), Y * np.trace(X))
    assert np.allclose(hm.partial_transpose(T, (2, 3)), np.kron(X, Y.T))


def test_swap_and_omega():
    d = 3
    S = hm.swap_operator(d)
    a, b = np.arange(1, 4), np.array([2, -1, 5])
    assert np.allclose(S @ np.kron(a, b), np.kron(b, a))
    assert np.allclose(hm.partial_transpose(S), hm.max_entangled(d))
    assert np.isclose(np.trace(hm.max_entangled(d)).real, d)


def test_vec_tensor_permutation():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    Y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    P = hm.vec_tensor_permutation(2, 3)
    lhs = hm.vectorize(np.kron(X, Y))
    assert np.allclose(lhs, P @ np.kron(hm.vectorize(X), hm.vectorize(Y)))
    assert np.allclose(P @ P.T, np.eye(36))


def test_hermitian_coords_basis_span():
    d = 3
    B = hm.hermitian_basis(d)
    assert B.shape == (9, 3, 3)
    coords = np.array([hm.hermitian_coords(b) for b in B])
    assert np.linalg.matrix_rank(coords) == 9
    for b in B:
        assert hm.is_hermitian(b)


def test_trace_norm_and_state():
    assert np.isclose(hm.trace_norm(np.diag([1.0, -2.0, 0.5])), 3.5)
    assert hm.is_state(hm.bloch_state([0, 0, 1]))
    assert not hm.is_state(np.eye(2))
