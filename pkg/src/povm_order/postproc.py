"""Post-processing order between POVMs, decided by LP feasibility.

``A <= B`` iff there is a column-stochastic ``mu`` (rows indexed by outcomes
of A, columns by outcomes of B) with ``A_x = sum_y mu[x, y] B_y``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from . import hermitian as hm
from .errors import DimensionMismatch, SolverStall
from .povm import Povm, validate

LP_TOL = 1e-8
RESIDUAL_TOL = 1e-7
PIVOT_TOL = 1e-11


def phase_one_simplex(
    A_eq: np.ndarray,
    b_eq: np.ndarray,
    tol: float = LP_TOL,
    max_iter: int | None = None,
) -> tuple[np.ndarray | None, float]:
    """Find ``x >= 0`` with ``A_eq x = b_eq`` by minimising a sum of artificials.

    Dense tableau, Bland's rule.  Returns ``(x, phase_one_value)``; ``x`` is
    None when the optimum of the auxiliary problem exceeds ``tol``.  Redundant
    rows are fine: their artificials stay basic at level zero.
    """
    A_full = np.array(A_eq, dtype=float)
    b_full = np.array(b_eq, dtype=float)
    A, b = _independent_rows(A_full, b_full)
    m, n = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    if max_iter is None:
        max_iter = 50 * (n + m) + 1000
    for _ in range(max_iter):
        costs = T[m, : n + m]
        candidates = np.flatnonzero(costs < -tol * 1e-2)
        if candidates.size == 0:
            break
        j = int(candidates[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            # cannot happen for a bounded auxiliary problem; treat as numerical noise
            T[m, j] = 0.0
            continue
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12]
        i = int(min(ties, key=lambda r: basis[r]))
        T[i] /= T[i, j]
        for r in range(m + 1):
            if r != i and T[r, j] != 0.0:
                T[r] -= T[r, j] * T[i]
        basis[i] = j
    else:
        raise SolverStall(f"simplex did not terminate in {max_iter} pivots")

    value = -T[m, -1]
    if value > tol:
        return None, float(value)

    x = np.zeros(n)
    structural = [(r, j) for r, j in enumerate(basis) if j < n]
    if structural:
        cols = [j for _, j in structural]
        # re-solve the basic system from the original data to shed pivoting error
        sol, *_ = np.linalg.lstsq(A[:, cols], b, rcond=None)
        x[cols] = sol
    x[(x < 0) & (x > -1e-10)] = 0.0
    scale = max(1.0, float(np.max(np.abs(b_full), initial=0.0)))
    if np.max(np.abs(A_full @ x - b_full), initial=0.0) > RESIDUAL_TOL * scale:
        # a dropped (dependent) row is inconsistent with the kept ones
        return None, float(value)
    return x, float(value)


def _independent_rows(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop linearly dependent equality rows; they make the tableau highly degenerate."""
    if A.shape[0] == 0:
        return A, b
    _, R, piv = qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        return A[:0], b[:0]
    rank = int(np.sum(diag > PIVOT_TOL * 10 * diag[0]))
    keep = np.sort(piv[:rank])
    return A[keep], b[keep]


def _operator_rows(effects: list[np.ndarray]) -> np.ndarray:
    return np.array([hm.hermitian_coords(E) for E in effects]).T


def check_postprocessing(A: Povm, B: Povm, tol: float = LP_TOL) -> np.ndarray | None:
    """Column-stochastic witness ``mu`` of ``A <= B``, or None."""
    if A.dim != B.dim:
        raise DimensionMismatch(f"dimensions {A.dim} and {B.dim} differ")
    m, n = len(A), len(B)
    Bc = _operator_rows(list(B.effects))  # (d^2, n)
    Ac = _operator_rows(list(A.effects))  # (d^2, m)
    k = Bc.shape[0]
    # variable index x*n + y
    rows = []
    rhs = []
    for x in range(m):
        block = np.zeros((k, m * n))
        block[:, x * n:(x + 1) * n] = Bc
        rows.append(block)
        rhs.append(Ac[:, x])
    colsum = np.zeros((n, m * n))
    for y in range(n):
        colsum[y, y::n] = 1.0
    rows.append(colsum)
    rhs.append(np.ones(n))
    x, _ = phase_one_simplex(np.vstack(rows), np.concatenate(rhs), tol=tol)
    if x is None:
        return None
    mu = x.reshape(m, n)
    if reconstruction_residual(A, B, mu) > RESIDUAL_TOL:
        return None
    if np.max(np.abs(mu.sum(axis=0) - 1)) > RESIDUAL_TOL:
        return None
    return mu


def reconstruction_residual(A: Povm, B: Povm, mu: np.ndarray) -> float:
    Bs = B.stacked()
    recon = np.einsum("xy,yij->xij", mu, Bs)
    return float(np.max(np.abs(recon - A.stacked())))


def post_process(B: Povm, mu: np.ndarray) -> Povm:
    """The POVM ``A_x = sum_y mu[x, y] B_y``."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape[1] != len(B):
        raise DimensionMismatch(f"mu has {mu.shape[1]} columns, B has {len(B)} outcomes")
    if np.any(mu < -1e-12) or np.max(np.abs(mu.sum(axis=0) - 1)) > 1e-9:
        raise ValueError("mu is not column stochastic")
    return validate(list(np.einsum("xy,yij->xij", mu, B.stacked())))


class Relation(enum.Enum):
    LESS_EQ = "less_eq"
    GREATER_EQ = "greater_eq"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


@dataclass
class OrderVerdict:
    relation: Relation
    forward: np.ndarray | None  # witness of A <= B
    backward: np.ndarray | None  # witness of B <= A
    tol: float = LP_TOL
    residual_tol: float = RESIDUAL_TOL

    def to_json(self) -> dict:
        out = {
            "relation": self.relation.value,
            "lp_tol": self.tol,
            "residual_tol": self.residual_tol,
        }
        if self.forward is not None:
            out["mu_forward"] = self.forward.tolist()
        if self.backward is not None:
            out["mu_backward"] = self.backward.tolist()
        return out


def classify_order(A: Povm, B: Povm, tol: float = LP_TOL) -> OrderVerdict:
    fwd = check_postprocessing(A, B, tol)
    bwd = check_postprocessing(B, A, tol)
    if fwd is not None and bwd is not None:
        rel = Relation.EQUIVALENT
    elif fwd is not None:
        rel = Relation.LESS_EQ
    elif bwd is not None:
        rel = Relation.GREATER_EQ
    else:
        rel = Relation.INCOMPARABLE
    return OrderVerdict(rel, fwd, bwd, tol)


def concat_mix(A: Povm, B: Povm, lam: float) -> Povm:
    """Concatenation ``lam A |_| (1 - lam) B`` with disjoint labels.

    Labels of A are kept; labels of B are shifted past ``max(A.labels)``.
    """
    if A.dim != B.dim:
        raise DimensionMismatch(f"dimensions {A.dim} and {B.dim} differ")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda={lam} outside [0, 1]")
    if lam == 1.0:
        return A
    if lam == 0.0:
        return B
    shift = max(A.labels) - min(B.labels) + 1
    effects = [lam * E for E in A.effects] + [(1 - lam) * E for E in B.effects]
    labels = list(A.labels) + [y + shift for y in B.labels]
    return validate(effects, labels)


def compose(mu_ab: np.ndarray, mu_bc: np.ndarray) -> np.ndarray:
    """Witness of ``A <= C`` from witnesses of ``A <= B`` and ``B <= C``."""
    return np.asarray(mu_ab) @ np.asarray(mu_bc)
