"""Grid scans over the standard families: Fourier pairs, qubit pairs and triples, planar fans.

Every scan returns a :class:`ScanResult` whose records are in grid order no
matter how many worker threads were used (``POVM_ORDER_THREADS``).
"""

from __future__ import annotations

import io
import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dominance as dm
from . import hermitian as hm
from . import incompat as ic
from .errors import BadBloch, BadParameter
from .povm import make_fourier_pair, make_planar, make_qubit_dichotomic

BLOCH_CLAMP = 1 - 1e-6
MIXED_BLOCH = (1 / 2, 1 / 3, 1 / 3)  # reference mixed state for qubit-pair curves
DEFAULT_GRID = 101
RESULT_COLUMNS = ("height", "zhu_verdict", "analytic_flag", "oracle_verdict")


def bloch_rho(v) -> np.ndarray:
    """Qubit state for a Bloch vector, pulled inside the ball when ``|v| = 1``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise BadBloch(f"Bloch vector must have three components, got {v.shape}")
    r = float(np.linalg.norm(v))
    if r > 1 + 1e-12:
        raise BadBloch(f"|v| = {r} exceeds 1")
    if r > BLOCH_CLAMP:
        v = v * (BLOCH_CLAMP / r)
    return hm.bloch_state(v)


def _threads() -> int:
    raw = os.environ.get("POVM_ORDER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise BadParameter(f"POVM_ORDER_THREADS={raw!r} is not an integer") from None


def _map(fn: Callable, items: list) -> list:
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))  # map keeps input order


def _flag(compatible: bool | None) -> str:
    if compatible is None:
        return ""
    return "compatible" if compatible else "incompatible"


@dataclass
class ScanResult:
    params: tuple[str, ...]
    grids: dict[str, list[float]]
    records: list[dict]
    metadata: dict = field(default_factory=dict)

    @property
    def columns(self) -> tuple[str, ...]:
        return self.params + RESULT_COLUMNS

    def column(self, name: str) -> list:
        return [r[name] for r in self.records]

    def to_csv(self, path: str | None = None) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for r in self.records:
            cells = []
            for name in self.columns:
                val = r.get(name)
                if val is None:
                    cells.append("")
                elif isinstance(val, float):
                    cells.append("%.12g" % val)
                else:
                    cells.append(str(val))
            buf.write(",".join(cells) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        return text

    def to_json(self) -> dict:
        return {
            "params": list(self.params),
            "grids": self.grids,
            "records": self.records,
            "metadata": self.metadata,
        }


def _grid(lo: float, hi: float, n: int) -> list[float]:
    if n < 2:
        raise BadParameter("grid needs at least two points")
    return [float(x) for x in np.linspace(lo, hi, n)]


def _meta(rho_desc) -> dict:
    return {
        "rho": rho_desc,
        "deadband": ic.DEADBAND,
        "sdp_gap": dm.INTERNAL_GAP,
        "joint_tol": ic.JOINT_TOL,
        "bloch_clamp": BLOCH_CLAMP,
        "seed": None,
    }


# ---------------------------------------------------------------------------


def fourier_analytic_compatible(d: int, s: float, t: float) -> bool:
    return s + t <= 1 or s * s + t * t + 2 * (d - 2) / d * (1 - s) * (1 - t) <= 1


def scan_fourier(d: int, grid_n: int = DEFAULT_GRID) -> ScanResult:
    """Zhu test with ``rho = I/d`` on a uniform ``(s, t)`` grid over the unit square."""
    if d < 2:
        raise BadParameter("d must be >= 2")
    grid = _grid(0.0, 1.0, grid_n)
    pts = [(s, t) for s in grid for t in grid]

    def point(st):
        s, t = st
        v = ic.zhu_criterion(list(make_fourier_pair(d, s, t)))
        return {
            "s": s, "t": t, "height": v.value,
            "zhu_verdict": v.verdict.value,
            "analytic_flag": _flag(fourier_analytic_compatible(d, s, t)),
            "oracle_verdict": None,
            "margin": v.margin,
        }

    meta = _meta("maximally-mixed")
    meta["d"] = d
    return ScanResult(("s", "t"), {"s": grid, "t": grid}, _map(point, pts), meta)


def busch_compatible(eta1: float, n1, eta2: float, n2) -> bool:
    """Exact joint measurability of two unbiased qubit dichotomics."""
    a, b = eta1 * np.asarray(n1, float), eta2 * np.asarray(n2, float)
    return float(np.linalg.norm(a + b) + np.linalg.norm(a - b)) <= 2 + 1e-12


def _bloch_list(bloch) -> list[np.ndarray]:
    arr = np.asarray(bloch, dtype=float)
    if arr.ndim == 1:
        arr = arr[None]
    return [v for v in arr]


def scan_qubit_pair(
    axes: Sequence,
    bloch,
    eta_grid: Sequence[float] | None = None,
    pattern: Sequence[float | None] | None = None,
    oracle: bool = False,
) -> ScanResult:
    """Height of ``{F_rho(A1), F_rho(A2)}`` over a sharpness grid.

    ``bloch`` may be one Bloch vector or a path of them.  Without ``pattern``
    the grid is two-dimensional over ``(eta1, eta2)``; with e.g. ``(None, 0.5)``
    only the ``None`` slots follow the grid (all together).
    """
    n1, n2 = (np.asarray(a, float) for a in axes)
    eta_grid = list(eta_grid) if eta_grid is not None else _grid(0.0, 1.0, DEFAULT_GRID)
    if pattern is None:
        etas = [(a, b) for a in eta_grid for b in eta_grid]
    else:
        etas = [tuple(e if p is None else float(p) for p in pattern) for e in eta_grid]
    vs = _bloch_list(bloch)
    rhos = [bloch_rho(v) for v in vs]
    pts = [(k, e) for k in range(len(vs)) for e in etas]

    def point(item):
        k, (e1, e2) = item
        fam = [make_qubit_dichotomic(e1, n1), make_qubit_dichotomic(e2, n2)]
        v = ic.zhu_criterion(fam, rhos[k])
        rec = {"v1": vs[k][0], "v2": vs[k][1], "v3": vs[k][2], "eta1": e1, "eta2": e2,
               "height": v.value, "zhu_verdict": v.verdict.value,
               "analytic_flag": _flag(busch_compatible(e1, n1, e2, n2)),
               "oracle_verdict": None, "margin": v.margin}
        if oracle:
            rec["oracle_verdict"] = _flag(ic.joint_measurement(fam).feasible)
        return rec

    meta = _meta([list(map(float, v)) for v in vs])
    meta["axes"] = [n1.tolist(), n2.tolist()]
    return ScanResult(("v1", "v2", "v3", "eta1", "eta2"),
                      {"eta": eta_grid}, _map(point, pts), meta)


def scan_qubit_triple(
    axes: Sequence,
    bloch,
    eta_grid: Sequence[float] | None = None,
    pattern: Sequence[float | None] = (None, None, None),
    oracle: bool = False,
) -> ScanResult:
    """Height of three qubit dichotomics; the analytic flag is the Fermat-Torricelli test.

    ``pattern`` fixes some sharpness values, e.g. ``(None, 0.5, 0.5)`` scans
    ``eta1`` with ``eta2 = eta3 = 0.5``.
    """
    ns = [np.asarray(a, float) for a in axes]
    if len(ns) != 3:
        raise BadParameter("need three axes")
    eta_grid = list(eta_grid) if eta_grid is not None else _grid(0.0, 1.0, DEFAULT_GRID)
    vs = _bloch_list(bloch)
    rhos = [bloch_rho(v) for v in vs]
    etas = [tuple(e if p is None else float(p) for p in pattern) for e in eta_grid]
    pts = [(k, e) for k in range(len(vs)) for e in etas]

    def point(item):
        k, es = item
        fam = [make_qubit_dichotomic(e, n) for e, n in zip(es, ns)]
        v = ic.zhu_criterion(fam, rhos[k])
        ft = ic.ft_compatible(es, ns)
        rec = {"v1": vs[k][0], "v2": vs[k][1], "v3": vs[k][2],
               "eta1": es[0], "eta2": es[1], "eta3": es[2],
               "height": v.value, "zhu_verdict": v.verdict.value,
               "analytic_flag": _flag(ft.compatible), "oracle_verdict": None,
               "margin": v.margin}
        if oracle:
            rec["oracle_verdict"] = _flag(ic.joint_measurement(fam).feasible)
        return rec

    meta = _meta([list(map(float, v)) for v in vs])
    meta["axes"] = [n.tolist() for n in ns]
    meta["pattern"] = list(pattern)
    return ScanResult(("v1", "v2", "v3", "eta1", "eta2", "eta3"),
                      {"eta": eta_grid}, _map(point, pts), meta)


def planar_optimal_threshold(M: int) -> float:
    return 1.0 / (M * math.sin(math.pi / (2 * M)))


def scan_planar(M: int, lam_grid: Sequence[float] | None = None) -> ScanResult:
    """``M`` equiangular in-plane qubit dichotomics with sharpness ``lam``, ``rho = I/2``."""
    if M < 2:
        raise BadParameter("M must be >= 2")
    lam_grid = list(lam_grid) if lam_grid is not None else _grid(0.0, 1.0, DEFAULT_GRID)
    opt = planar_optimal_threshold(M)

    def point(lam):
        v = ic.zhu_criterion(make_planar(M, lam))
        return {"lam": lam, "height": v.value, "zhu_verdict": v.verdict.value,
                "analytic_flag": _flag(lam <= opt + 1e-12), "oracle_verdict": None,
                "margin": v.margin}

    meta = _meta("maximally-mixed")
    meta.update(M=M, optimal_threshold=opt, zhu_threshold=1 / math.sqrt(2))
    return ScanResult(("lam",), {"lam": lam_grid}, _map(point, lam_grid), meta)


def bisect_boundary(incompatible: Callable[[float], bool], lo: float, hi: float,
                    tol: float = 1e-6) -> float:
    """Locate the switch of a monotone predicate that is False at ``lo`` and True at ``hi``."""
    if incompatible(lo) or not incompatible(hi):
        raise BadParameter("predicate must be False at lo and True at hi")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if incompatible(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def planar_zhu_boundary(M: int, tol: float = 1e-6) -> float:
    return bisect_boundary(lambda lam: ic.zhu_criterion(make_planar(M, lam)).incompatible,
                           0.0, 1.0, tol)
