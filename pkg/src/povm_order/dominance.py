"""The height function ``h(X) = min{tr H : H >= X_i for all i}``.

Its dual is ``max sum_i tr(X_i Y_i)`` over n-outcome measurements ``Y``.
Two matrices have the closed form ``(tr X1 + tr X2 + ||X1 - X2||_1) / 2``;
larger families go through a log-barrier interior-point method.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from . import hermitian as hm
from .barrier import BarrierState, Block, barrier_minimize
from .errors import BadParameter, DimensionMismatch, NotPSD

log = logging.getLogger(__name__)

GAP_TOL = 1e-6
INTERNAL_GAP = 1e-9  # relative target; keeps reported gaps far inside GAP_TOL
MAX_NEWTON = 200
FEAS_TOL = 1e-7
RANK_CUT = 1e-12


class HeightStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"


@dataclass(eq=False)
class HeightResult:
    value: float  # certified lower bound sum_i tr(X_i Y_i)
    H_opt: np.ndarray
    dual_Y: list[np.ndarray]
    gap: float
    status: HeightStatus = HeightStatus.OPTIMAL
    primal_value: float = field(default=np.nan)
    newton_steps: int = 0
    method: str = "sdp"

    @property
    def dual_value(self) -> float:
        return self.value

    def to_json(self, certificate: bool = False) -> dict:
        out = {
            "value": self.value,
            "primal": self.primal_value,
            "gap": self.gap,
            "status": self.status.value,
            "method": self.method,
        }
        if certificate:
            out["H_opt"] = _cplx_json(self.H_opt)
            out["dual_Y"] = [_cplx_json(Y) for Y in self.dual_Y]
        return out


def _cplx_json(M: np.ndarray) -> list:
    return [[[z.real, z.imag] for z in row] for row in np.asarray(M).tolist()]


def _check_family(X: Sequence) -> list[np.ndarray]:
    if len(X) == 0:
        raise BadParameter("need at least one matrix")
    mats = [hm.check_hermitian(M) for M in X]
    D = mats[0].shape[0]
    for M in mats[1:]:
        if M.shape[0] != D:
            raise DimensionMismatch(f"matrices of size {D} and {M.shape[0]}")
    return mats


def height_two(X1, X2) -> float:
    X1, X2 = _check_family([X1, X2])
    return 0.5 * (np.trace(X1).real + np.trace(X2).real + hm.trace_norm(X1 - X2))


def height_two_result(X1, X2) -> HeightResult:
    """Closed form with an explicit primal/dual certificate.

    ``H = (X1 + X2 + |X1 - X2|) / 2`` dominates both, and the projector onto
    the positive part of ``X1 - X2`` (with its complement) attains the value.
    """
    X1, X2 = _check_family([X1, X2])
    w, V = hm.eig_hermitian(X1 - X2)
    absdiff = hm.hermitian_part((V * np.abs(w)) @ hm.dag(V))
    H = hm.hermitian_part((X1 + X2 + absdiff) / 2)
    Vp = V[:, w > 0]
    P = Vp @ hm.dag(Vp)
    Y = [P, np.eye(X1.shape[0]) - P]
    dual = float(np.real(np.trace(X1 @ Y[0]) + np.trace(X2 @ Y[1])))
    primal = float(np.trace(H).real)
    return HeightResult(dual, H, Y, primal - dual, HeightStatus.OPTIMAL, primal, 0, "closed_form")


def _normalise_dual(S_inv: list[np.ndarray]) -> list[np.ndarray]:
    # rescale the central-path multipliers into an exact measurement
    total = hm.hermitian_part(sum(S_inv))
    T = hm.pinv_sqrt(total, rank_tol=1e-15)
    return [hm.hermitian_part(T @ Z @ T) for Z in S_inv]


def _solve_full(mats: list[np.ndarray], gap_tol: float, max_newton: int) -> HeightResult:
    D = mats[0].shape[0]
    basis = hm.hermitian_basis(D)
    m = basis.shape[0]
    c = np.zeros(m)
    c[:D] = 1.0
    h0 = sum(np.trace(X).real for X in mats) / D + max(
        hm.eigvals_hermitian(X)[-1] for X in mats
    ) + 1.0
    x0 = np.zeros(m)
    x0[:D] = h0
    blocks = [Block(-X, basis) for X in mats]
    best: dict = {}

    def certify(state: BarrierState) -> bool:
        Y = _normalise_dual(state.dual_blocks())
        dual = float(sum(np.real(np.trace(X @ Yi)) for X, Yi in zip(mats, Y)))
        primal = float(c @ state.x)
        best.update(Y=Y, dual=dual, primal=primal, x=state.x.copy())
        return primal - dual <= gap_tol * (1.0 + abs(primal))

    state, ok = barrier_minimize(c, blocks, x0, done=certify, mu=5.0, max_newton=max_newton)
    if "Y" not in best:
        certify(state)
    H = hm.hermitian_part(np.tensordot(best["x"], basis, axes=1))
    status = HeightStatus.OPTIMAL if ok else HeightStatus.MAX_ITER
    if not ok:
        log.warning("height SDP stopped after %d Newton steps", state.newton_steps)
    return HeightResult(
        best["dual"], H, best["Y"], best["primal"] - best["dual"], status,
        best["primal"], state.newton_steps, "sdp",
    )


def height_sdp(X: Sequence, gap_tol: float = INTERNAL_GAP, max_newton: int = MAX_NEWTON) -> HeightResult:
    """Height of an arbitrary Hermitian family by interior point.

    PSD families are first compressed onto the joint support of the ``X_i``;
    the complement is handed to the first dual outcome at zero cost.
    """
    mats = _check_family(X)
    D = mats[0].shape[0]
    if len(mats) == 1:
        # H = X is feasible and tr H >= tr X for every H >= X
        t = float(np.trace(mats[0]).real)
        return HeightResult(t, mats[0], [np.eye(D, dtype=complex)], 0.0,
                            HeightStatus.OPTIMAL, t, 0, "single")
    if all(hm.is_psd(M) for M in mats):
        total = sum(mats)
        if np.max(np.abs(total), initial=0.0) == 0.0:
            return HeightResult(0.0, np.zeros((D, D), complex),
                                [np.eye(D, dtype=complex)] + [np.zeros((D, D), complex)] * (len(mats) - 1),
                                0.0, HeightStatus.OPTIMAL, 0.0, 0, "zero")
        V = hm.support_basis(total, rank_tol=1e-12)
        if V.shape[1] < D:
            small = [hm.hermitian_part(hm.dag(V) @ M @ V) for M in mats]
            res = _solve_full(small, gap_tol, max_newton)
            comp = np.eye(D) - V @ hm.dag(V)
            Y = [V @ Yi @ hm.dag(V) for Yi in res.dual_Y]
            Y[0] = Y[0] + comp
            H = hm.hermitian_part(V @ res.H_opt @ hm.dag(V))
            return HeightResult(res.value, H, [hm.hermitian_part(y) for y in Y], res.gap,
                                res.status, res.primal_value, res.newton_steps, "sdp")
    return _solve_full(mats, gap_tol, max_newton)


def height(X: Sequence, gap_tol: float = INTERNAL_GAP) -> HeightResult:
    """Dispatch: closed form for one or two matrices, SDP otherwise."""
    mats = _check_family(X)
    if len(mats) <= 2:
        return height_two_result(*mats) if len(mats) == 2 else height_sdp(mats)
    return height_sdp(mats, gap_tol)


def height_factored(factors: Sequence[np.ndarray], gap_tol: float = INTERNAL_GAP) -> HeightResult:
    """Height of the PSD family ``X_i = W_i W_i^*`` computed on the span of the ``W_i``.

    Exact: every ``X_i`` lives on that span, so an optimal ``H`` does too and
    the dual complement can go to any outcome at zero cost.
    """
    Ws = [np.asarray(W, dtype=complex) for W in factors]
    if not Ws:
        raise BadParameter("need at least one matrix")
    D = Ws[0].shape[0]
    if any(W.shape[0] != D for W in Ws):
        raise DimensionMismatch("factors have different row counts")
    allW = np.hstack(Ws)
    if allW.shape[1] == 0 or not np.any(allW):
        zero = np.zeros((D, D), dtype=complex)
        Y = [np.eye(D, dtype=complex)] + [zero] * (len(Ws) - 1)
        return HeightResult(0.0, zero, Y, 0.0, HeightStatus.OPTIMAL, 0.0, 0, "zero")
    U, sv, _ = np.linalg.svd(allW, full_matrices=False)
    Q = U[:, sv > RANK_CUT * sv[0]]
    if Q.shape[1] == D:
        return height([W @ W.conj().T for W in Ws], gap_tol)
    small = []
    for W in Ws:
        R = hm.dag(Q) @ W
        small.append(hm.hermitian_part(R @ hm.dag(R)))
    res = height(small, gap_tol)
    Y = [Q @ y @ hm.dag(Q) for y in res.dual_Y]
    Y[0] = Y[0] + np.eye(D) - Q @ hm.dag(Q)
    H = hm.hermitian_part(Q @ res.H_opt @ hm.dag(Q))
    return HeightResult(res.value, H, [hm.hermitian_part(y) for y in Y], res.gap,
                        res.status, res.primal_value, res.newton_steps, res.method)


def pretty_good_measurement(X: Sequence) -> list[np.ndarray]:
    """``Y_i = S^{-1/2} X_i S^{-1/2}`` plus a final outcome ``I - supp(S)``."""
    mats = _check_family(X)
    for i, M in enumerate(mats):
        if not hm.is_psd(M):
            raise NotPSD(f"matrix {i} is not PSD; the PGM bound needs PSD inputs")
    S = hm.hermitian_part(sum(mats))
    T = hm.pinv_sqrt(S)
    Y = [hm.hermitian_part(T @ M @ T) for M in mats]
    D = S.shape[0]
    Y.append(np.eye(D) - hm.hermitian_part(sum(Y)))
    return Y


def pgm_lower_bound(X: Sequence) -> float:
    mats = _check_family(X)
    Y = pretty_good_measurement(mats)
    return float(sum(np.real(np.trace(M @ Yi)) for M, Yi in zip(mats, Y)))


def check_result(X: Sequence, res: HeightResult, tol: float = FEAS_TOL) -> dict:
    """Residuals of the certificate: primal dominance, dual POVM, and the gap sign."""
    mats = _check_family(X)
    D = mats[0].shape[0]
    dom = min(hm.eigvals_hermitian(res.H_opt - M)[0] for M in mats)
    ypsd = min(hm.eigvals_hermitian(Y)[0] for Y in res.dual_Y)
    ysum = float(np.max(np.abs(sum(res.dual_Y) - np.eye(D))))
    return {
        "dominance_min_eig": float(dom),
        "dual_min_eig": float(ypsd),
        "dual_sum_residual": ysum,
        "gap": res.gap,
        "ok": dom >= -tol and ypsd >= -tol and ysum <= tol and res.gap >= -tol,
    }
