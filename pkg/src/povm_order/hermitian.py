"""Dense complex linear algebra shared by every other module.

All matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Vectorization is column-major: entry ``(i, j)`` of a ``d x d`` matrix lands at
index ``i + d*j`` of the stacked vector.  With ``numpy.kron`` ordering this
means ``vectorize(|a><b|) = conj(b) (x) a``: the *first* tensor factor of a
super-vector carries the column index.
"""

from __future__ import annotations

import numpy as np

from .errors import DimNotSquare, NoConvergence, NotHermitian, NotPSD

TOL_HERM = 1e-10
PSD_TOL = 1e-9
RANK_TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimNotSquare(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def dag(M: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(M))


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + dag(M)) / 2


def is_hermitian(M, tol: float = TOL_HERM) -> bool:
    M = as_matrix(M)
    return bool(np.max(np.abs(M - dag(M)), initial=0.0) <= tol)


def check_hermitian(M, tol: float = TOL_HERM) -> np.ndarray:
    """Return ``M`` as a complex array, exactly Hermitian, or raise NotHermitian."""
    M = as_matrix(M)
    err = np.max(np.abs(M - dag(M)), initial=0.0)
    if err > tol:
        raise NotHermitian(f"||M - M^*||_max = {err:.3e} exceeds {tol:.1e}")
    return hermitian_part(M)


def eig_hermitian(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and a unitary matrix of eigenvectors."""
    M = check_hermitian(M)
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return w, V


def eigvals_hermitian(M) -> np.ndarray:
    M = check_hermitian(M)
    try:
        return np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def is_psd(M, tol: float = PSD_TOL) -> bool:
    return bool(eigvals_hermitian(M)[0] >= -tol)


def _apply_spectral(w: np.ndarray, V: np.ndarray, f_w: np.ndarray) -> np.ndarray:
    return hermitian_part((V * f_w) @ dag(V))


def sqrt_psd(M, tol: float = PSD_TOL) -> np.ndarray:
    w, V = eig_hermitian(M)
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w[0] < -tol * scale:
        raise NotPSD(f"min eigenvalue {w[0]:.3e}")
    return _apply_spectral(w, V, np.sqrt(np.clip(w, 0.0, None)))


def pinv_sqrt(M, rank_tol: float = RANK_TOL, tol: float = PSD_TOL) -> np.ndarray:
    """Pseudo-inverse square root; eigenvalues below ``rank_tol * ||M||`` count as zero."""
    w, V = eig_hermitian(M)
    norm = float(np.max(np.abs(w), initial=0.0))
    if w[0] < -tol * max(1.0, norm):
        raise NotPSD(f"min eigenvalue {w[0]:.3e}")
    cut = rank_tol * norm
    inv = np.zeros_like(w)
    keep = w > cut
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return _apply_spectral(w, V, inv)


def support_projector(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    w, V = eig_hermitian(M)
    cut = rank_tol * float(np.max(np.abs(w), initial=0.0))
    Vk = V[:, np.abs(w) > cut]
    return Vk @ dag(Vk)


def support_basis(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal columns spanning the range of a Hermitian ``M``."""
    w, V = eig_hermitian(M)
    cut = rank_tol * float(np.max(np.abs(w), initial=0.0))
    return V[:, np.abs(w) > cut]


def trace_norm(M) -> float:
    return float(np.sum(np.abs(eigvals_hermitian(M))))


def vectorize(E) -> np.ndarray:
    E = np.asarray(E, dtype=complex)
    return E.reshape(-1, order="F")


def unvectorize(v, d: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimNotSquare(f"vector of length {v.size} is not d^2")
    return v.reshape((d, d), order="F")


def tensor(*ops) -> np.ndarray:
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def _factor_dim(n: int) -> int:
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise DimNotSquare(f"dimension {n} is not of the form d^2")
    return d


def partial_transpose(M, dims: tuple[int, int] | None = None) -> np.ndarray:
    """Transpose the second tensor factor of an operator on ``C^d1 (x) C^d2``."""
    M = as_matrix(M)
    d1, d2 = dims if dims is not None else (_factor_dim(M.shape[0]),) * 2
    if d1 * d2 != M.shape[0]:
        raise DimNotSquare(f"dims {dims} do not match shape {M.shape}")
    T = M.reshape(d1, d2, d1, d2).transpose(0, 3, 2, 1)
    return T.reshape(d1 * d2, d1 * d2)


def partial_trace(M, dims: tuple[int, int], keep: int = 0) -> np.ndarray:
    """Trace out one factor of ``C^d1 (x) C^d2``; ``keep`` selects the surviving one."""
    d1, d2 = dims
    T = as_matrix(M).reshape(d1, d2, d1, d2)
    if keep == 0:
        return np.einsum("ajbj->ab", T)
    return np.einsum("iaib->ab", T)


def swap_operator(d: int) -> np.ndarray:
    S = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            S[j * d + i, i * d + j] = 1.0
    return S


def max_entangled(d: int) -> np.ndarray:
    """Un-normalised projector onto sum_i e_i (x) e_i; trace ``d``."""
    omega = vectorize(np.eye(d))
    return np.outer(omega, omega.conj())


def sym_projector(d: int) -> np.ndarray:
    return (np.eye(d * d) + swap_operator(d)) / 2


def vec_tensor_permutation(d1: int, d2: int) -> np.ndarray:
    """Permutation ``P`` with ``vectorize(X (x) Y) = P @ (vectorize(X) (x) vectorize(Y))``."""
    n = (d1 * d2) ** 2
    P = np.zeros((n, n))
    for i1 in range(d1):
        for j1 in range(d1):
            for i2 in range(d2):
                for j2 in range(d2):
                    row, col = i1 * d2 + i2, j1 * d2 + j2
                    target = row + d1 * d2 * col
                    source = (i1 + d1 * j1) * d2 * d2 + (i2 + d2 * j2)
                    P[target, source] = 1.0
    return P


def hermitian_coords(M) -> np.ndarray:
    """Real coordinates of a Hermitian matrix: diagonal, then Re and Im of the strict upper triangle."""
    M = np.asarray(M, dtype=complex)
    iu = np.triu_indices(M.shape[0], k=1)
    return np.concatenate([np.real(np.diag(M)), np.real(M[iu]), np.imag(M[iu])])


def hermitian_basis(d: int) -> np.ndarray:
    """Array of shape ``(d*d, d, d)`` whose real span is the Hermitian matrices.

    Ordered to match :func:`hermitian_coords` up to a factor 2 on off-diagonal
    coordinates (the basis elements are ``E_ij + E_ji`` and ``i(E_ji - E_ij)``).
    """
    basis = []
    for k in range(d):
        B = np.zeros((d, d), dtype=complex)
        B[k, k] = 1
        basis.append(B)
    iu = list(zip(*np.triu_indices(d, k=1)))
    for i, j in iu:
        B = np.zeros((d, d), dtype=complex)
        B[i, j] = B[j, i] = 1
        basis.append(B)
    for i, j in iu:
        B = np.zeros((d, d), dtype=complex)
        B[i, j] = -1j
        B[j, i] = 1j
        basis.append(B)
    return np.array(basis)


def is_state(rho, tol: float = PSD_TOL) -> bool:
    try:
        rho = check_hermitian(rho)
    except (NotHermitian, DimNotSquare):
        return False
    return abs(np.trace(rho).real - 1) <= tol * rho.shape[0] and is_psd(rho, tol)


def bloch_state(v) -> np.ndarray:
    """Qubit density matrix ``(I + v . sigma) / 2``."""
    v = np.asarray(v, dtype=float)
    return (np.eye(2) + sum(c * s for c, s in zip(v, PAULIS))) / 2
