"""Incompatibility tests built on the Fisher images and the height function.

A family ``A`` is certified incompatible when ``h(F_rho(A)) > min(d, prod l_i)``.
The other direction is never claimed; ``joint_measurement`` is a direct
feasibility oracle for small cases, and ``ft_condition`` is the exact test for
three unbiased qubit dichotomics.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from . import dominance as dm
from . import hermitian as hm
from .barrier import BarrierState, Block, barrier_minimize
from .errors import BadParameter, DimensionMismatch, SolverStall
from .morphisms import MorphismSpec, fisher, fisher_factor
from .povm import (
    Povm,
    QubitDichotomic,
    check_state,
    length,
    make_anticommuting_family,
    validate,
)

log = logging.getLogger(__name__)

DEADBAND = 1e-6
JOINT_TOL = 1e-7
FT_LIMIT = 4.0
FT_TOL = 1e-9


class Verdict(enum.Enum):
    INCOMPATIBLE = "incompatible"
    INCONCLUSIVE = "inconclusive"


@dataclass(eq=False)
class IncompatVerdict:
    verdict: Verdict
    margin: float  # height (or its lower bound) minus threshold
    value: float
    threshold: float
    rho: np.ndarray
    lengths: tuple[int, ...]
    certificate: dm.HeightResult | None = None
    boundary: bool = False
    method: str = "zhu"

    @property
    def incompatible(self) -> bool:
        return self.verdict is Verdict.INCOMPATIBLE

    def to_json(self, certificate: bool = False) -> dict:
        out = {
            "verdict": self.verdict.value,
            "height": self.value,
            "threshold": self.threshold,
            "margin": self.margin,
            "boundary": self.boundary,
            "lengths": list(self.lengths),
            "method": self.method,
        }
        if self.certificate is not None:
            out["gap"] = self.certificate.gap
            out["status"] = self.certificate.status.value
            if certificate:
                out["certificate"] = self.certificate.to_json(certificate=True)
        return out


def _common_dim(povms: Sequence[Povm]) -> int:
    if len(povms) == 0:
        raise BadParameter("need at least one POVM")
    d = povms[0].dim
    for P in povms[1:]:
        if P.dim != d:
            raise DimensionMismatch(f"POVM dimensions {d} and {P.dim} differ")
    return d


def _state(rho, d: int) -> np.ndarray:
    if rho is None:
        return np.eye(d, dtype=complex) / d
    rho = check_state(rho)
    if rho.shape[0] != d:
        raise DimensionMismatch(f"state has dim {rho.shape[0]}, POVMs have {d}")
    return rho


def threshold(povms: Sequence[Povm]) -> tuple[float, tuple[int, ...]]:
    d = _common_dim(povms)
    ells = tuple(length(P) for P in povms)
    return float(min(d, math.prod(ells))), ells


def _decide(value: float, thr: float) -> tuple[Verdict, float, bool]:
    margin = value - thr
    verdict = Verdict.INCOMPATIBLE if margin > DEADBAND else Verdict.INCONCLUSIVE
    return verdict, margin, abs(margin) <= DEADBAND


def fisher_images(povms: Sequence[Povm], rho=None) -> list[np.ndarray]:
    d = _common_dim(povms)
    rho = _state(rho, d)
    return [fisher(P, rho) for P in povms]


def zhu_criterion(povms: Sequence[Povm], rho=None) -> IncompatVerdict:
    """Incompatible when the height of the Fisher images beats ``min(d, prod l_i)``.

    The height used is the dual (lower) bound of the solver, so an
    Incompatible answer is backed by an explicit dual measurement.
    """
    d = _common_dim(povms)
    rho = _state(rho, d)
    thr, ells = threshold(povms)
    spec = MorphismSpec.fisher(rho)
    res = dm.height_factored([fisher_factor(spec, P)[0] for P in povms])
    verdict, margin, boundary = _decide(res.value, thr)
    return IncompatVerdict(verdict, margin, res.value, thr, rho, ells, res, boundary, "zhu")


def pgm_criterion(povms: Sequence[Povm], rho=None) -> IncompatVerdict:
    """Same test with the pretty-good-measurement lower bound instead of the SDP."""
    d = _common_dim(povms)
    rho = _state(rho, d)
    thr, ells = threshold(povms)
    value = dm.pgm_lower_bound([fisher(P, rho) for P in povms])
    verdict, margin, boundary = _decide(value, thr)
    return IncompatVerdict(verdict, margin, value, thr, rho, ells, None, boundary, "pgm")


def joint_outcome_bound(povms: Sequence[Povm], rho=None) -> float:
    """Lower bound on the length of any joint measurement of ``povms``."""
    d = _common_dim(povms)
    spec = MorphismSpec.fisher(_state(rho, d))
    return dm.height_factored([fisher_factor(spec, P)[0] for P in povms]).value


# ---------------------------------------------------------------------------
# direct joint-measurement oracle


@dataclass(eq=False)
class JointResult:
    feasible: bool
    joint: Povm | None
    slack: float  # best lower bound on max_t { C_tau >= t I }
    upper: float  # upper estimate of the same
    newton_steps: int = 0


def _particular_solution(povms: Sequence[Povm], shape: tuple[int, ...]) -> list[np.ndarray]:
    d = povms[0].dim
    g = len(povms)
    probs = [np.array([np.trace(E).real / d for E in P.effects]) for P in povms]
    out = []
    for tau in np.ndindex(*shape):
        p = [probs[j][tau[j]] for j in range(g)]
        C = -(g - 1) * math.prod(p) * np.eye(d, dtype=complex)
        for i in range(g):
            C = C + math.prod(p[:i] + p[i + 1:]) * povms[i].effects[tau[i]]
        out.append(C)
    return out


def joint_measurement(povms: Sequence[Povm], tol: float = JOINT_TOL) -> JointResult:
    """Search for ``C_tau >= 0`` (tau ranging over outcome tuples) with the given marginals.

    Maximises ``t`` subject to ``C_tau - t I >= 0``; the marginal equalities are
    eliminated through a null-space parametrisation.  Outcome ``tau`` of the
    returned joint POVM carries the label ``ravel_multi_index(tau)``.
    """
    d = _common_dim(povms)
    shape = tuple(len(P) for P in povms)
    taus = list(np.ndindex(*shape))
    rows = []
    for i, n in enumerate(shape):
        for x in range(n):
            rows.append([1.0 if tau[i] == x else 0.0 for tau in taus])
    N = null_space(np.array(rows))  # (K, r)
    basis = hm.hermitian_basis(d)
    C0 = _particular_solution(povms, shape)
    r = N.shape[1]
    m = r * d * d + 1
    blocks = []
    for k, tau in enumerate(taus):
        coeffs = np.zeros((m, d, d), dtype=complex)
        if r:
            coeffs[:-1] = (N[k][:, None, None, None] * basis[None]).reshape(-1, d, d)
        coeffs[-1] = -np.eye(d)
        blocks.append(Block(C0[k], coeffs))
    c = np.zeros(m)
    c[-1] = -1.0
    x0 = np.zeros(m)
    x0[-1] = min(hm.eigvals_hermitian(C)[0] for C in C0) - 1.0
    verdict: dict = {}

    def done(state: BarrierState) -> bool:
        s = float(state.x[-1])
        up = s + state.gap_estimate
        verdict.update(s=s, up=up)
        if s >= 0.0:
            verdict["feasible"] = True
        elif up < -tol:
            verdict["feasible"] = False
        elif state.gap_estimate < 1e-3 * tol:
            verdict["feasible"] = s >= -tol
        return "feasible" in verdict

    state, ok = barrier_minimize(c, blocks, x0, done=done, mu=5.0, max_newton=400)
    if not ok:
        raise SolverStall(f"joint measurement search did not settle (t in [{verdict.get('s')}, {verdict.get('up')}])")
    joint = None
    if verdict["feasible"]:
        effects = [hm.hermitian_part(b.at(state.x) + state.x[-1] * np.eye(d)) for b in blocks]
        labels = [int(np.ravel_multi_index(tau, shape)) for tau in taus]
        joint = validate(effects, labels, tol=tol, name="joint")
    return JointResult(verdict["feasible"], joint, verdict["s"], verdict["up"], state.newton_steps)


def joint_feasibility(A: Povm, B: Povm, tol: float = JOINT_TOL) -> Povm | None:
    """Joint POVM ``C`` with ``sum_y C_xy = A_x`` and ``sum_x C_xy = B_y``, or None."""
    return joint_measurement([A, B], tol).joint


def marginals(C: Povm, shape: tuple[int, ...]) -> list[list[np.ndarray]]:
    """Marginal effects of a joint POVM produced by ``joint_measurement``."""
    d = C.dim
    stack = np.zeros(shape + (d, d), dtype=complex)
    for lab, E in zip(C.labels, C.effects):
        stack[np.unravel_index(lab, shape)] = E
    out = []
    for i in range(len(shape)):
        axes = tuple(j for j in range(len(shape)) if j != i)
        out.append(list(stack.sum(axis=axes)))
    return out


# ---------------------------------------------------------------------------
# Fermat-Torricelli test for three unbiased qubit dichotomics


@dataclass(eq=False)
class FTAnalysis:
    points: np.ndarray  # rows v0, v1, v2, v3
    ft_point: np.ndarray
    total_distance: float
    compatible: bool
    iterations: int = 0
    at_vertex: bool = False

    def to_json(self) -> dict:
        return {
            "points": self.points.tolist(),
            "ft_point": self.ft_point.tolist(),
            "total_distance": self.total_distance,
            "compatible": self.compatible,
            "iterations": self.iterations,
            "at_vertex": self.at_vertex,
        }


def ft_points(etas: Sequence[float], axes: Sequence) -> np.ndarray:
    n = np.asarray(axes, dtype=float)
    eta = np.asarray(etas, dtype=float)
    v0 = -(eta[:, None] * n).sum(axis=0)
    vk = -2 * eta[:, None] * n - v0
    return np.vstack([v0, vk])


def geometric_median(points: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000):
    """Weiszfeld iteration with duplicate grouping and a vertex-optimality check.

    Returns ``(point, iterations, at_vertex)``.
    """
    pts = np.asarray(points, dtype=float)
    uniq, weights = [], []
    for p in pts:
        for k, q in enumerate(uniq):
            if np.linalg.norm(p - q) <= tol:
                weights[k] += 1.0
                break
        else:
            uniq.append(p.copy())
            weights.append(1.0)
    U, w = np.array(uniq), np.array(weights)
    if len(U) == 1:
        return U[0], 0, True

    def pull(i: int) -> np.ndarray:
        diff = U[i] - np.delete(U, i, axis=0)
        dist = np.linalg.norm(diff, axis=1)
        return (np.delete(w, i)[:, None] * diff / dist[:, None]).sum(axis=0)

    # a data point is optimal iff the unit pulls of the others do not exceed its weight
    for i in range(len(U)):
        if np.linalg.norm(pull(i)) <= w[i]:
            return U[i], 0, True

    y = (w[:, None] * U).sum(axis=0) / w.sum()
    for it in range(1, max_iter + 1):
        dist = np.linalg.norm(U - y, axis=1)
        hit = np.flatnonzero(dist <= tol)
        if hit.size:
            # non-optimal vertex (checked above): step off along the descent direction
            i = int(hit[0])
            R = -pull(i)
            y = U[i] + 1e-9 * R / np.linalg.norm(R)
            continue
        inv = w / dist
        y_new = (inv[:, None] * U).sum(axis=0) / inv.sum()
        if np.linalg.norm(y_new - y) <= tol:
            return y_new, it, False
        y = y_new
    return y, max_iter, False


def ft_condition(measurements: Sequence[QubitDichotomic]) -> FTAnalysis:
    """Exact joint-measurability test for three unbiased qubit dichotomics."""
    if len(measurements) != 3:
        raise BadParameter("the Fermat-Torricelli test needs exactly three measurements")
    etas = [m.eta for m in measurements]
    axes = [m.n for m in measurements]
    pts = ft_points(etas, axes)
    y, its, vertex = geometric_median(pts)
    total = float(np.linalg.norm(pts - y, axis=1).sum())
    return FTAnalysis(pts, y, total, total <= FT_LIMIT + FT_TOL, its, vertex)


def ft_compatible(etas: Sequence[float], axes: Sequence) -> FTAnalysis:
    return ft_condition([QubitDichotomic(float(e), tuple(map(float, n))) for e, n in zip(etas, axes)])


# ---------------------------------------------------------------------------
# anticommuting families


@dataclass(eq=False)
class AnticommutingVerdict:
    g: int
    d: int
    s: tuple[float, ...]
    analytic_incompatible: bool  # sum s_i^2 > d - 1
    trivial: bool  # sum s_i^2 <= g <= d - 1 can never exceed d - 1
    sdp: IncompatVerdict | None
    agree: bool
    true_compatible: bool  # sum s_i^2 <= 1

    def to_json(self) -> dict:
        out = {
            "g": self.g,
            "d": self.d,
            "s": list(self.s),
            "analytic_incompatible": self.analytic_incompatible,
            "trivial": self.trivial,
            "agree": self.agree,
            "true_compatible": self.true_compatible,
        }
        if self.sdp is not None:
            out["zhu"] = self.sdp.to_json()
        return out


def anticommuting_criterion(g: int, s: Sequence[float] | None = None, run_sdp: bool = True) -> AnticommutingVerdict:
    """Analytic and numerical Zhu test for ``(I +- s_i T_i) / 2`` with anticommuting ``T_i``.

    With ``rho = I/d`` the Fisher images are ``omega/d + s_i^2 |t_i><t_i|`` on
    orthogonal supports, so the height is ``1 + sum s_i^2`` and the test fires
    iff ``sum s_i^2 > d - 1``.
    """
    if g < 2:
        raise BadParameter("g must be at least 2")
    s = tuple(float(x) for x in (s if s is not None else [1.0] * g))
    if len(s) != g or any(not 0.0 <= x <= 1.0 for x in s):
        raise BadParameter(f"noise vector must have {g} entries in [0, 1]")
    fam = make_anticommuting_family(g, s)
    d = fam[0].dim
    total = sum(x * x for x in s)
    analytic = total > d - 1 + DEADBAND
    sdp = zhu_criterion(fam) if run_sdp else None
    agree = sdp is None or sdp.incompatible == analytic
    if not agree:
        log.error("anticommuting family g=%d: analytic and SDP verdicts differ", g)
    return AnticommutingVerdict(g, d, s, analytic, g <= d - 1, sdp, agree, total <= 1 + 1e-12)
