"""POVM data model, validation, simple representatives and standard constructors."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from . import hermitian as hm
from .errors import (
    BadParameter,
    DimensionMismatch,
    DuplicateLabel,
    EffectNotPSD,
    NotAState,
    SumNotIdentity,
)

PSD_TOL = 1e-9
SUM_TOL = 1e-9  # scaled by d
COLLINEAR_TOL = 1e-9
ZERO_EFFECT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Povm:
    """A finite-outcome measurement: PSD effects summing to the identity.

    Instances are produced by :func:`validate` (or the constructors below),
    which certify the invariants.  ``simple`` is set by :func:`simplify`.
    """

    effects: tuple[np.ndarray, ...]
    labels: tuple[int, ...]
    simple: bool = False
    name: str | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def __len__(self) -> int:
        return len(self.effects)

    def __iter__(self):
        return iter(self.effects)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.effects[i]

    def stacked(self) -> np.ndarray:
        return np.array(self.effects)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "effects": [
                [[[float(z.real), float(z.imag)] for z in row] for row in E]
                for E in self.effects
            ],
            "labels": list(self.labels),
        }

    @classmethod
    def from_json(cls, obj: dict, tol: float = PSD_TOL) -> Povm:
        try:
            d = int(obj["dim"])
            effects = [
                np.array([[complex(re, im) for re, im in row] for row in E])
                for E in obj["effects"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise BadParameter(f"malformed POVM object: {exc}") from exc
        for i, E in enumerate(effects):
            if E.shape != (d, d):
                raise DimensionMismatch(f"effect {i} has shape {E.shape}, expected ({d}, {d})")
        return validate(effects, obj.get("labels"), tol=tol)


def validate(
    effects: Sequence,
    labels: Sequence[int] | None = None,
    tol: float = PSD_TOL,
    name: str | None = None,
) -> Povm:
    if len(effects) == 0:
        raise BadParameter("a POVM needs at least one effect")
    mats = []
    for i, E in enumerate(effects):
        try:
            mats.append(hm.check_hermitian(E))
        except hm.NotHermitian as exc:
            raise hm.NotHermitian(f"effect {i}: {exc}") from exc
    d = mats[0].shape[0]
    for i, E in enumerate(mats):
        if E.shape != (d, d):
            raise DimensionMismatch(f"effect {i} has shape {E.shape}, expected ({d}, {d})")
    for i, E in enumerate(mats):
        lo = float(np.linalg.eigvalsh(E)[0])
        if lo < -tol:
            raise EffectNotPSD(i, lo)
    residual = float(np.max(np.abs(sum(mats) - np.eye(d))))
    if residual > max(tol, SUM_TOL) * d:
        raise SumNotIdentity(residual)
    if labels is None:
        labels = range(len(mats))
    labels = tuple(int(x) for x in labels)
    if len(labels) != len(mats):
        raise BadParameter(f"{len(labels)} labels for {len(mats)} effects")
    if len(set(labels)) != len(labels):
        raise DuplicateLabel(f"labels {labels} are not distinct")
    return Povm(tuple(mats), labels, name=name)


def _collinear(Ex: np.ndarray, Ey: np.ndarray) -> bool:
    # least-squares scalar c with Ex ~ c Ey
    c = float(np.real(np.vdot(Ey, Ex)) / np.real(np.vdot(Ey, Ey)))
    if c < -1e-12:
        return False
    c = max(c, 0.0)
    return float(np.max(np.abs(Ex - c * Ey))) <= COLLINEAR_TOL


def simplify(P: Povm) -> Povm:
    """Simple representative: drop zero effects and merge collinear ones.

    Merged outcomes keep the smaller label.  The number of remaining effects
    is the length of the equivalence class.
    """
    items = [
        (lab, E) for lab, E in zip(P.labels, P.effects)
        if np.max(np.abs(E)) > ZERO_EFFECT_TOL
    ]
    merged = True
    while merged:
        merged = False
        for a in range(len(items)):
            for b in range(a + 1, len(items)):
                if _collinear(items[a][1], items[b][1]):
                    lab = min(items[a][0], items[b][0])
                    items[a] = (lab, items[a][1] + items[b][1])
                    del items[b]
                    merged = True
                    break
            if merged:
                break
    items.sort(key=lambda it: it[0])
    return Povm(
        tuple(hm.hermitian_part(E) for _, E in items),
        tuple(lab for lab, _ in items),
        simple=True,
        name=P.name,
    )


def length(P: Povm) -> int:
    """Number of outcomes of the simple representative of ``[P]``."""
    return len(P) if P.simple else len(simplify(P))


# ---------------------------------------------------------------------------
# constructors


def trivial(d: int, weights: Sequence[float] = (1.0,)) -> Povm:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
        raise BadParameter("trivial POVM weights must be a probability vector")
    return validate([x * np.eye(d) for x in w], name="trivial")


def make_von_neumann(basis) -> Povm:
    U = np.asarray(basis, dtype=complex)
    d = U.shape[0]
    if U.shape != (d, d) or not np.allclose(U.conj().T @ U, np.eye(d), atol=1e-10):
        raise BadParameter("basis must be a unitary matrix (columns = basis vectors)")
    return validate([np.outer(U[:, i], U[:, i].conj()) for i in range(d)], name="von-neumann")


def fourier_matrix(d: int) -> np.ndarray:
    zeta = np.exp(2j * np.pi / d)
    a = np.arange(d)
    return zeta ** np.outer(a, a) / np.sqrt(d)


def make_fourier_pair(d: int, s: float, t: float) -> tuple[Povm, Povm]:
    """Noisy computational basis (sharpness ``s``) and noisy Fourier basis (sharpness ``t``)."""
    if d < 2:
        raise BadParameter("d must be >= 2")
    for name, x in (("s", s), ("t", t)):
        if not 0.0 <= x <= 1.0:
            raise BadParameter(f"{name}={x} outside [0, 1]")
    F = fourier_matrix(d)
    noise = np.eye(d) / d
    A = [s * np.outer(e, e) + (1 - s) * noise for e in np.eye(d)]
    B = [t * np.outer(F[:, j], F[:, j].conj()) + (1 - t) * noise for j in range(d)]
    return validate(A, name=f"fourier-A(s={s})"), validate(B, name=f"fourier-B(t={t})")


@dataclass(frozen=True)
class QubitDichotomic:
    """Unbiased two-outcome qubit measurement ``(I +- eta n.sigma) / 2``."""

    eta: float
    direction: tuple[float, float, float]

    def __post_init__(self):
        n = np.asarray(self.direction, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-12:
            raise BadParameter(f"direction {self.direction} is not a unit vector in R^3")
        if not 0.0 <= self.eta <= 1.0:
            raise BadParameter(f"sharpness {self.eta} outside [0, 1]")

    @property
    def n(self) -> np.ndarray:
        return np.asarray(self.direction, dtype=float)

    def povm(self) -> Povm:
        return make_qubit_dichotomic(self.eta, self.direction)


def _unit(n) -> tuple[float, float, float]:
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise BadParameter("zero direction vector")
    return tuple(float(x) for x in n / norm)


def make_qubit_dichotomic(eta: float, n) -> Povm:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-12:
        raise BadParameter(f"direction {n} is not a unit vector in R^3")
    if not 0.0 <= eta <= 1.0:
        raise BadParameter(f"sharpness {eta} outside [0, 1]")
    T = eta * sum(c * s for c, s in zip(n, hm.PAULIS))
    I = np.eye(2)
    return validate([(I + T) / 2, (I - T) / 2], labels=(1, -1), name=f"qubit(eta={eta})")


def trine_directions() -> list[tuple[float, float, float]]:
    return [_unit((math.cos(k * math.pi / 3), math.sin(k * math.pi / 3), 0.0)) for k in range(3)]


def orthogonal_planar_directions() -> list[tuple[float, float, float]]:
    """First axis along z, the other two in the xy-plane at angles pi/3 and 2pi/3."""
    return [(0.0, 0.0, 1.0)] + [
        _unit((math.cos(k * math.pi / 3), math.sin(k * math.pi / 3), 0.0)) for k in (1, 2)
    ]


def make_trine(eta: float) -> list[Povm]:
    return [make_qubit_dichotomic(eta, n) for n in trine_directions()]


def make_planar(M: int, lam: float) -> list[Povm]:
    """``M`` equiangular qubit dichotomics in the xy-plane with sharpness ``lam``."""
    if M < 1:
        raise BadParameter("M must be >= 1")
    dirs = [(math.cos(k * math.pi / M), math.sin(k * math.pi / M), 0.0) for k in range(M)]
    return [make_qubit_dichotomic(lam, _unit(n)) for n in dirs]


def make_sic_qubit() -> Povm:
    tetra = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3)
    return validate(
        [(np.eye(2) + sum(c * s for c, s in zip(n, hm.PAULIS))) / 4 for n in tetra],
        name="sic-qubit",
    )


def make_mub_complete_qubit() -> Povm:
    """All six Pauli eigenprojectors with weight 1/3."""
    effects = []
    for s in hm.PAULIS:
        effects += [(np.eye(2) + s) / 6, (np.eye(2) - s) / 6]
    return validate(effects, name="mub-complete-qubit")


def anticommuting_generators(g: int) -> list[np.ndarray]:
    """``g`` pairwise anticommuting Hermitian unitaries on ``d = 2**ceil((g-1)/2)``.

    Clifford ladder: start from the Paulis on C^2; each doubling maps the old
    family T_i to sigma_x (x) T_i and appends sigma_y (x) I, sigma_z (x) I.
    """
    if g < 1:
        raise BadParameter("g must be >= 1")
    levels = max(1, math.ceil((g - 1) / 2))
    gens = list(hm.PAULIS)
    for _ in range(levels - 1):
        dim = gens[0].shape[0]
        I = np.eye(dim)
        gens = [np.kron(hm.PAULI_X, T) for T in gens] + [
            np.kron(hm.PAULI_Y, I),
            np.kron(hm.PAULI_Z, I),
        ]
    return gens[:g]


def make_anticommuting_family(g: int, s: Sequence[float] | None = None) -> list[Povm]:
    """Unbiased dichotomics ``(I +- s_i T_i) / 2`` built on anticommuting unitaries."""
    gens = anticommuting_generators(g)
    if s is None:
        s = [1.0] * g
    if len(s) != g or any(not 0.0 <= x <= 1.0 for x in s):
        raise BadParameter(f"noise vector {s} must have {g} entries in [0, 1]")
    I = np.eye(gens[0].shape[0])
    return [
        validate([(I + x * T) / 2, (I - x * T) / 2], labels=(1, -1), name=f"anticommuting-{i}")
        for i, (x, T) in enumerate(zip(s, gens))
    ]


def check_state(rho, tol: float = PSD_TOL) -> np.ndarray:
    try:
        rho = hm.check_hermitian(rho)
    except (hm.NotHermitian, hm.DimNotSquare) as exc:
        raise NotAState(str(exc)) from exc
    if not hm.is_state(rho, tol):
        raise NotAState("rho must be positive semidefinite with unit trace")
    return rho


def noisy_mixture(P: Povm, lam: float, rho) -> Povm:
    """Effects ``lam A_i + (1 - lam) tr(rho A_i) I``."""
    if not 0.0 <= lam <= 1.0:
        raise BadParameter(f"lambda={lam} outside [0, 1]")
    rho = check_state(rho)
    if rho.shape[0] != P.dim:
        raise DimensionMismatch("state and POVM dimensions differ")
    I = np.eye(P.dim)
    effects = [lam * A + (1 - lam) * np.trace(rho @ A).real * I for A in P.effects]
    return validate(effects, P.labels, name=P.name)


def _zigzag(n: int) -> int:
    return 2 * n if n >= 0 else -2 * n - 1


def pair_labels(x: int, y: int) -> int:
    """Bijection Z^2 -> N (zigzag then Cantor pairing)."""
    a, b = _zigzag(x), _zigzag(y)
    return (a + b) * (a + b + 1) // 2 + b


def tensor_povm(A: Povm, B: Povm) -> Povm:
    effects, labels = [], []
    for x, Ax in zip(A.labels, A.effects):
        for y, By in zip(B.labels, B.effects):
            effects.append(np.kron(Ax, By))
            labels.append(pair_labels(x, y))
    return validate(effects, labels)


def random_povm(d: int, n: int, seed: int) -> Povm:
    """Wishart-style random POVM, deterministic for a given seed."""
    if n < 1 or d < 1:
        raise BadParameter("need d >= 1 and n >= 1")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    M = G @ np.conj(np.transpose(G, (0, 2, 1)))
    S_inv_half = hm.pinv_sqrt(M.sum(axis=0))
    return validate([hm.hermitian_part(S_inv_half @ Mi @ S_inv_half) for Mi in M])


def random_state(d: int, seed: int) -> np.ndarray:
    """Full-rank random density matrix (Ginibre)."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = G @ G.conj().T + 1e-3 * np.eye(d)
    return hm.hermitian_part(rho / np.trace(rho).real)
