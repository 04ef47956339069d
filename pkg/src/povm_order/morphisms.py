"""Quadratic order morphisms ``g(E) = Phi(E) Phi(E)^* / tau(E)`` and their sums over POVMs.

The Fisher map uses ``Phi(E) = vectorize(rho^{1/2} E)`` (column stacking) and
``tau(E) = tr(rho E)``.  With this convention the 4x4 qubit matrices for
``rho = (I + v3 sigma_z) / 2`` come out exactly in the textbook layout, with
no extra index permutation.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from . import hermitian as hm
from .errors import BadParameter, DimensionMismatch, ZeroDenominator
from .povm import Povm, check_state

DENOM_TOL = 1e-12
SIGN_DEADBAND = 1e-8
MIN_RHO_EIG = 1e-10


class MorphismKind(enum.Enum):
    FISHER = "fisher"
    FISHER_TRUNCATED = "fisher_truncated"
    PSI = "psi"
    DIAG = "diag"
    SQUARE = "square"
    TRACE = "trace"


@dataclass(frozen=True, eq=False)
class MorphismSpec:
    kind: MorphismKind
    dim: int
    rho: np.ndarray | None = None
    psi: np.ndarray | None = None
    rho_sqrt: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def fisher(cls, rho, truncated: bool = False) -> MorphismSpec:
        rho = check_state(rho)
        lo = float(np.linalg.eigvalsh(rho)[0])
        if lo < MIN_RHO_EIG:
            raise BadParameter(f"rho must be positive definite (min eigenvalue {lo:.2e})")
        kind = MorphismKind.FISHER_TRUNCATED if truncated else MorphismKind.FISHER
        d = rho.shape[0]
        if np.array_equal(rho, np.eye(d) / d):
            root = np.eye(d, dtype=complex) / np.sqrt(d)
        else:
            root = hm.sqrt_psd(rho)
        return cls(kind, d, rho=rho, rho_sqrt=root)

    @classmethod
    def maximally_mixed(cls, d: int, truncated: bool = False) -> MorphismSpec:
        return cls.fisher(np.eye(d) / d, truncated)

    @classmethod
    def psi_map(cls, psi) -> MorphismSpec:
        psi = np.asarray(psi, dtype=complex).ravel()
        if abs(np.linalg.norm(psi) - 1) > 1e-12:
            raise BadParameter("psi must be a unit vector")
        return cls(MorphismKind.PSI, psi.size, psi=psi)

    @classmethod
    def diag(cls, d: int) -> MorphismSpec:
        return cls(MorphismKind.DIAG, d)

    @classmethod
    def square(cls, d: int) -> MorphismSpec:
        return cls(MorphismKind.SQUARE, d)

    @classmethod
    def trace(cls, d: int) -> MorphismSpec:
        return cls(MorphismKind.TRACE, d)

    @property
    def out_dim(self) -> int:
        if self.kind in (MorphismKind.FISHER, MorphismKind.FISHER_TRUNCATED):
            return self.dim ** 2
        if self.kind is MorphismKind.TRACE:
            return 1
        return self.dim

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "dim": self.dim}
        if self.rho is not None:
            out["rho"] = [[[z.real, z.imag] for z in row] for row in self.rho.tolist()]
        if self.psi is not None:
            out["psi"] = [[z.real, z.imag] for z in self.psi.tolist()]
        return out


@dataclass(eq=False)
class FisherMatrix:
    """Image of a POVM under an order morphism."""

    matrix: np.ndarray
    spec: MorphismSpec
    skipped: int = 0  # effects dropped for a vanishing denominator
    source: str | None = None

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


def apply_effect(spec: MorphismSpec, E) -> np.ndarray:
    E = np.asarray(E, dtype=complex)
    if E.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"effect shape {E.shape} vs morphism dim {spec.dim}")
    kind = spec.kind
    if kind in (MorphismKind.FISHER, MorphismKind.FISHER_TRUNCATED):
        tau = float(np.real(np.trace(spec.rho @ E)))
        if tau <= DENOM_TOL:
            raise ZeroDenominator(f"tr(rho E) = {tau:.3e}")
        if kind is MorphismKind.FISHER_TRUNCATED:
            E = E - tau * np.eye(spec.dim)
        v = hm.vectorize(spec.rho_sqrt @ E)
        return np.outer(v, v.conj()) / tau
    if kind is MorphismKind.PSI:
        v = E @ spec.psi
        tau = float(np.real(np.vdot(spec.psi, v)))
        if tau <= DENOM_TOL:
            raise ZeroDenominator(f"<psi|E|psi> = {tau:.3e}")
        return np.outer(v, v.conj()) / tau
    tau = float(np.real(np.trace(E)))
    if tau <= DENOM_TOL:
        raise ZeroDenominator(f"tr E = {tau:.3e}")
    if kind is MorphismKind.DIAG:
        return np.diag(np.diag(E) * np.conj(np.diag(E))) / tau
    if kind is MorphismKind.SQUARE:
        return E @ hm.dag(E) / tau
    if kind is MorphismKind.TRACE:
        return np.array([[tau]], dtype=complex)
    raise BadParameter(f"unknown morphism kind {kind}")


def apply(spec: MorphismSpec, A: Povm) -> FisherMatrix:
    """``G(A) = sum_x g(A_x)``, skipping terms with a vanishing denominator."""
    if A.dim != spec.dim:
        raise DimensionMismatch(f"POVM dim {A.dim} vs morphism dim {spec.dim}")
    if spec.kind in (MorphismKind.FISHER, MorphismKind.FISHER_TRUNCATED):
        return _apply_fisher(spec, A)
    out = np.zeros((spec.out_dim, spec.out_dim), dtype=complex)
    skipped = 0
    for E in A.effects:
        try:
            out += apply_effect(spec, E)
        except ZeroDenominator:
            skipped += 1
    return FisherMatrix(hm.hermitian_part(out), spec, skipped, A.name)


def fisher_factor(spec: MorphismSpec, A: Povm) -> tuple[np.ndarray, int]:
    """``W`` with ``F(A) = W W^*``: columns ``vec(rho^1/2 E_x) / sqrt(tr(rho E_x))``.

    Also returns the number of effects skipped for a vanishing denominator.
    """
    if spec.kind not in (MorphismKind.FISHER, MorphismKind.FISHER_TRUNCATED):
        raise BadParameter("only Fisher maps have a column factor")
    if A.dim != spec.dim:
        raise DimensionMismatch(f"POVM dim {A.dim} vs morphism dim {spec.dim}")
    Es = A.stacked()
    d = spec.dim
    taus = np.real(np.einsum("ij,xji->x", spec.rho, Es))
    keep = taus > DENOM_TOL
    Es, taus = Es[keep], taus[keep]
    if spec.kind is MorphismKind.FISHER_TRUNCATED:
        Es = Es - taus[:, None, None] * np.eye(d)
    M = spec.rho_sqrt @ Es
    V = np.transpose(M, (0, 2, 1)).reshape(len(taus), d * d).T
    return V / np.sqrt(taus), int((~keep).sum())


def _apply_fisher(spec: MorphismSpec, A: Povm) -> FisherMatrix:
    W, skipped = fisher_factor(spec, A)
    return FisherMatrix(hm.hermitian_part(W @ W.conj().T), spec, skipped, A.name)


def fisher(A: Povm, rho=None, truncated: bool = False) -> np.ndarray:
    """Fisher information matrix ``F_rho(A)``; ``rho`` defaults to ``I/d``."""
    spec = (
        MorphismSpec.maximally_mixed(A.dim, truncated)
        if rho is None
        else MorphismSpec.fisher(rho, truncated)
    )
    return apply(spec, A).matrix


def apply_truncated(rho, A: Povm) -> FisherMatrix:
    return apply(MorphismSpec.fisher(rho, truncated=True), A)


def rho_omega(rho) -> np.ndarray:
    """``|rho^{1/2}><rho^{1/2}|``: the Fisher image of every trivial measurement.

    In the column-stacking convention this equals ``(I (x) rho^{1/2}) omega
    (I (x) rho^{1/2})``, and also ``(rho^{1/2} (x) I) omega (rho^{1/2} (x) I)``
    whenever ``rho`` is real.
    """
    v = hm.vectorize(hm.sqrt_psd(check_state(rho)))
    return np.outer(v, v.conj())


# ---------------------------------------------------------------------------
# conjugation relations G(A) = J F(A) J^*


def conjugate(J, F: np.ndarray) -> np.ndarray:
    """``J F J^*`` for a single ``k x d^2`` matrix, or ``sum_k J_k F J_k^*`` for a stack."""
    J = np.asarray(J, dtype=complex)
    if J.ndim == 2:
        J = J[None]
    if J.shape[-1] != F.shape[0]:
        raise DimensionMismatch(f"J has {J.shape[-1]} columns, F is {F.shape[0]}x{F.shape[0]}")
    return hm.hermitian_part(np.einsum("kab,bc,kdc->ad", J, F, J.conj()))


def conjugate_relation(J, A: Povm, rho=None) -> np.ndarray:
    return conjugate(J, fisher(A, rho))


def j_diag(d: int) -> np.ndarray:
    """Kraus stack ``J_i = |i><ii|`` turning F into the diagonal map."""
    J = np.zeros((d, d, d * d))
    for i in range(d):
        J[i, i, i + d * i] = 1.0
    return J


def j_diag_vector(d: int) -> np.ndarray:
    """Single ``J = sum_i |i><ii|``: Phi(E) is the vector of diagonal entries."""
    return j_diag(d).sum(axis=0)


def j_square(d: int) -> np.ndarray:
    """Kraus stack ``J_j = <j| (x) I``; sum_j J_j F J_j^* is a partial trace of F.

    Under column stacking ``J_j vec(E) = E e_j``, so the sum reproduces
    ``E E^* / tr E`` for every effect.
    """
    return np.array([np.kron(e[None, :], np.eye(d)) for e in np.eye(d)])


# ---------------------------------------------------------------------------
# non-ordering detection


class SignPattern(enum.Enum):
    BOTH_SIGNS = "both_signs"
    ONLY_NONNEG = "only_nonneg"
    ONLY_NONPOS = "only_nonpos"
    ZERO = "zero"


def sign_pattern(M: np.ndarray, deadband: float = SIGN_DEADBAND) -> SignPattern:
    w = hm.eigvals_hermitian(M)
    pos, neg = w[-1] > deadband, w[0] < -deadband
    if pos and neg:
        return SignPattern.BOTH_SIGNS
    if pos:
        return SignPattern.ONLY_NONNEG
    if neg:
        return SignPattern.ONLY_NONPOS
    return SignPattern.ZERO


def nonorder_witness(
    spec: MorphismSpec, A: Povm, B: Povm, deadband: float = SIGN_DEADBAND
) -> SignPattern:
    """Sign pattern of ``G(A) - G(B)``; BOTH_SIGNS certifies that A, B are unordered."""
    return sign_pattern(apply(spec, A).matrix - apply(spec, B).matrix, deadband)


def two_design_image(P: Povm) -> np.ndarray:
    """``F(P)`` with ``rho = I/d``; equals ``2/(d+1) P_sym^Gamma`` for weighted 2-designs."""
    return fisher(P)


def two_design_target(d: int) -> np.ndarray:
    return 2.0 / (d + 1) * hm.partial_transpose(hm.sym_projector(d))


def images(povms: Sequence[Povm], rho=None, truncated: bool = False) -> list[np.ndarray]:
    return [fisher(P, rho, truncated) for P in povms]
