"""Small dense log-barrier method for linear matrix inequalities.

Solves ``min c.x  s.t.  F_k(x) = C_k + sum_j x_j A_kj > 0`` for a handful of
Hermitian blocks.  Newton steps use the exact Hessian
``H_jl = sum_k tr(F_k^-1 A_kj F_k^-1 A_kl)``; the parameter ``t`` grows by
``mu`` after every centering.  Meant for problems with at most a few hundred
variables.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import SolverStall

log = logging.getLogger(__name__)

CENTER_TOL = 1e-7
STALL_RTOL = 1e-13
ARMIJO = 0.25
T_MAX = 1e15


@dataclass
class Block:
    const: np.ndarray  # (D, D) Hermitian
    coeffs: np.ndarray  # (m, D, D) Hermitian

    def at(self, x: np.ndarray) -> np.ndarray:
        return self.const + np.tensordot(x, self.coeffs, axes=1)


@dataclass
class BarrierState:
    x: np.ndarray
    t: float
    newton_steps: int
    slacks: list[np.ndarray]

    def dual_blocks(self) -> list[np.ndarray]:
        """Central-path dual estimates ``F_k^-1 / t``."""
        return [np.linalg.inv(S) / self.t for S in self.slacks]

    @property
    def gap_estimate(self) -> float:
        return sum(S.shape[0] for S in self.slacks) / self.t


def _logdet_pd(S: np.ndarray) -> float | None:
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.real(np.diag(L)))))


def _barrier_value(blocks, c, x, t) -> float | None:
    total = t * float(c @ x)
    for b in blocks:
        ld = _logdet_pd(b.at(x))
        if ld is None:
            return None
        total -= ld
    return total


def _newton_system(blocks, c, x, t):
    m = x.size
    grad = t * c.copy()
    hess = np.zeros((m, m))
    slacks = []
    for b in blocks:
        S = b.at(x)
        S = (S + S.conj().T) / 2
        slacks.append(S)
        w, V = np.linalg.eigh(S)
        W = (V / np.sqrt(w)) @ V.conj().T
        G = W @ b.coeffs @ W  # (m, D, D)
        grad -= np.real(np.trace(G, axis1=1, axis2=2))
        flat = G.reshape(m, -1)
        hess += np.real(flat.conj() @ flat.T)
    return grad, hess, slacks


def _solve(hess: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(hess, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(hess, rhs, rcond=None)[0]


def barrier_minimize(
    c: np.ndarray,
    blocks: Sequence[Block],
    x0: np.ndarray,
    *,
    done: Callable[[BarrierState], bool],
    t0: float = 1.0,
    mu: float = 5.0,
    max_newton: int = 200,
) -> tuple[BarrierState, bool]:
    """Follow the central path until ``done(state)`` holds after a centering.

    Returns the final state and whether ``done`` was reached within the
    Newton budget.  ``x0`` must be strictly feasible.
    """
    c = np.asarray(c, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    t = t0
    if _barrier_value(blocks, c, x, t) is None:
        raise SolverStall("initial point is not strictly feasible")
    steps = 0
    while True:
        grad, hess, slacks = _newton_system(blocks, c, x, t)
        dx = -_solve(hess, grad)
        decrement = -float(grad @ dx)
        if decrement / 2 <= CENTER_TOL or not np.isfinite(decrement):
            state = BarrierState(x, t, steps, slacks)
            if done(state):
                return state, True
            if t >= T_MAX:
                return state, False
            t *= mu
            continue
        if steps >= max_newton:
            return BarrierState(x, t, steps, slacks), False
        phi = _barrier_value(blocks, c, x, t)
        step = 1.0
        while True:
            trial = _barrier_value(blocks, c, x + step * dx, t)
            if trial is not None and trial <= phi - ARMIJO * step * decrement:
                break
            step *= 0.5
            if step < 1e-14:
                break
        if step < 1e-14 or (trial is not None and phi - trial <= STALL_RTOL * abs(phi)):
            # rounding dominates the barrier value at this t; treat as centred
            state = BarrierState(x, t, steps, slacks)
            if done(state) or t >= T_MAX:
                return state, done(state)
            t *= mu
            continue
        x = x + step * dx
        steps += 1
