"""Command-line front end: ``povm-order <subcommand> ...``.

Exit codes: 0 computed, 2 invalid input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import dominance as dm
from . import incompat as ic
from . import morphisms as mo
from . import postproc as pp
from . import scenarios as sc
from .errors import (
    BadParameter,
    PovmOrderError,
    SolverError,
    ValidationError,
    ZeroDenominator,
)
from .povm import (
    Povm,
    check_state,
    length,
    orthogonal_planar_directions,
    simplify,
    trine_directions,
)

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


@dataclass
class CliConfig:
    lp_tol: float = pp.LP_TOL
    sdp_gap: float = dm.INTERNAL_GAP
    psd_tol: float = 1e-9
    fmt: str = "json"
    rho: str = "maximally-mixed"
    certificate: bool = False

    def __post_init__(self):
        for name in ("lp_tol", "sdp_gap", "psd_tol"):
            if not getattr(self, name) > 0:
                raise BadParameter(f"{name} must be positive")
        if self.fmt not in ("json", "csv", "human"):
            raise BadParameter(f"unknown format {self.fmt!r}")


# ---------------------------------------------------------------------------
# input helpers


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise BadParameter(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise BadParameter(f"{path}: invalid JSON ({exc})") from exc


def load_povm(path: str, cfg: CliConfig) -> Povm:
    obj = _load_json(path)
    try:
        P = Povm.from_json(obj, tol=cfg.psd_tol)
    except ValidationError as exc:
        raise _annotate(exc, path)
    return Povm(P.effects, P.labels, P.simple, name=path)


def _annotate(exc: ValidationError, path: str) -> ValidationError:
    exc.args = (f"{path}: {exc}",)
    return exc


def _matrix(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def load_operator_family(paths: list[str], cfg: CliConfig) -> tuple[list[np.ndarray], list[Povm]]:
    """Each file is either a POVM (mapped to its Fisher image) or ``{"matrix": ...}``."""
    mats, povms = [], []
    for path in paths:
        obj = _load_json(path)
        if isinstance(obj, dict) and "matrix" in obj:
            mats.append(_matrix(obj["matrix"]))
        else:
            try:
                P = Povm.from_json(obj, tol=cfg.psd_tol)
            except ValidationError as exc:
                raise _annotate(exc, path)
            povms.append(P)
    if povms:
        if mats:
            raise BadParameter("mix of POVM files and matrix files")
        rho = parse_rho(cfg.rho, povms[0].dim)
        mats = [mo.fisher(P, rho) for P in povms]
    return mats, povms


def parse_rho(src: str | None, d: int) -> np.ndarray:
    if src is None or src == "maximally-mixed":
        return np.eye(d, dtype=complex) / d
    if src.startswith("bloch:"):
        if d != 2:
            raise BadParameter("a Bloch vector needs qubit POVMs")
        return sc.bloch_rho(_floats(src[len("bloch:"):], 3))
    obj = _load_json(src)
    if isinstance(obj, dict):
        obj = obj.get("rho", obj.get("matrix"))
    rho = check_state(_matrix(obj))
    if rho.shape[0] != d:
        raise BadParameter(f"state has dimension {rho.shape[0]}, POVMs have {d}")
    return rho


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise BadParameter(f"cannot parse numbers from {text!r}") from exc
    if n is not None and len(vals) != n:
        raise BadParameter(f"expected {n} numbers, got {len(vals)} in {text!r}")
    return vals


_LETTER_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def parse_axes(spec: str, count: int) -> list[tuple[float, float, float]]:
    """``trine``, ``orth``, ``xyz``, letters like ``x,z``, or ``a,b,c;d,e,f;...``."""
    presets = {
        "trine": trine_directions(),
        "orth": orthogonal_planar_directions(),
        "xyz": [_LETTER_AXES[c] for c in "xyz"],
    }
    if spec in presets:
        axes = presets[spec]
    elif ";" in spec:
        axes = []
        for part in spec.split(";"):
            v = np.asarray(_floats(part, 3))
            norm = np.linalg.norm(v)
            if norm == 0:
                raise BadParameter("zero axis")
            axes.append(tuple(v / norm))
    else:
        letters = [c.strip() for c in spec.replace(",", " ").split()]
        if len(letters) == 1 and len(letters[0]) > 1:
            letters = list(letters[0])
        try:
            axes = [_LETTER_AXES[c] for c in letters]
        except KeyError as exc:
            raise BadParameter(f"unknown axis {exc.args[0]!r}") from None
    if len(axes) != count:
        raise BadParameter(f"need {count} axes, got {len(axes)}")
    return axes


# ---------------------------------------------------------------------------
# output helpers


def _clean(obj):
    """Round floats to 12 significant digits; NaN and inf become None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float("%.12g" % x) if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _cplx(M) -> list:
    return [[[z.real, z.imag] for z in row] for row in np.asarray(M).tolist()]


def emit(result: dict, cfg: CliConfig, out=None) -> None:
    out = out or sys.stdout
    data = _clean(result)
    if cfg.fmt == "json":
        out.write(json.dumps(data, allow_nan=False) + "\n")
    elif cfg.fmt == "csv":
        scalars = {k: v for k, v in data.items() if not isinstance(v, (list, dict))}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(scalars))
        w.writerow(["" if v is None else v for v in scalars.values()])
        out.write(buf.getvalue())
    else:
        for k, v in data.items():
            if isinstance(v, (list, dict)):
                v = json.dumps(v)
            out.write(f"{k}: {v}\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args, cfg):
    P = load_povm(args.file, cfg)
    return {"valid": True, "dim": P.dim, "n_outcomes": len(P), "length": length(P)}


def cmd_simplify(args, cfg):
    S = simplify(load_povm(args.file, cfg))
    obj = S.to_json()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(_clean(obj), fh)
            fh.write("\n")
    return obj


def cmd_order(args, cfg):
    A, B = load_povm(args.file_a, cfg), load_povm(args.file_b, cfg)
    return pp.classify_order(A, B, tol=cfg.lp_tol).to_json()


def cmd_fisher(args, cfg):
    P = load_povm(args.file, cfg)
    rho = parse_rho(cfg.rho, P.dim)
    spec = mo.MorphismSpec.fisher(rho, truncated=args.truncated)
    F = mo.apply(spec, P)
    return {"matrix": _cplx(F.matrix), "trace": F.trace, "skipped": F.skipped,
            "truncated": args.truncated, "length": length(P)}


def cmd_height(args, cfg):
    mats, _ = load_operator_family(args.files, cfg)
    res = dm.height(mats, gap_tol=cfg.sdp_gap)
    return res.to_json(certificate=cfg.certificate)


def cmd_incompat(args, cfg):
    povms = [load_povm(p, cfg) for p in args.files]
    rho = parse_rho(cfg.rho, povms[0].dim)
    v = (ic.pgm_criterion if args.pgm else ic.zhu_criterion)(povms, rho)
    return v.to_json(certificate=cfg.certificate)


def cmd_outcome_bound(args, cfg):
    povms = [load_povm(p, cfg) for p in args.files]
    rho = parse_rho(cfg.rho, povms[0].dim)
    return {"outcome_bound": ic.joint_outcome_bound(povms, rho)}


def cmd_joint(args, cfg):
    A, B = load_povm(args.file_a, cfg), load_povm(args.file_b, cfg)
    res = ic.joint_measurement([A, B])
    out = {"feasible": res.feasible, "slack": res.slack, "upper": res.upper,
           "shape": [len(A), len(B)]}
    out["joint"] = res.joint.to_json() if res.joint is not None else None
    return out


def cmd_ft(args, cfg):
    etas = _floats(args.etas, 3)
    axes = parse_axes(args.axes, 3)
    return ic.ft_compatible(etas, axes).to_json()


def cmd_scan(args, cfg):
    grid = None
    if args.grid is not None:
        grid = [float(x) for x in np.linspace(args.lo, args.hi, args.grid)]
    if args.family == "fourier":
        res = sc.scan_fourier(args.d, args.grid or sc.DEFAULT_GRID)
    elif args.family == "qubit-pair":
        pattern = _pattern(args.pattern, 2)
        res = sc.scan_qubit_pair(parse_axes(args.axes or "x,z", 2), _bloch(args.bloch),
                                 grid, pattern, oracle=args.oracle)
    elif args.family == "qubit-triple":
        pattern = _pattern(args.pattern, 3) or (None, None, None)
        res = sc.scan_qubit_triple(parse_axes(args.axes or "xyz", 3), _bloch(args.bloch),
                                   grid, pattern, oracle=args.oracle)
    else:
        res = sc.scan_planar(args.M, grid)
    return res


def _bloch(text: str) -> list[float]:
    return list(sc.MIXED_BLOCH) if text == "mixed" else _floats(text, 3)


def _pattern(text: str | None, n: int):
    if text is None:
        return None
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise BadParameter(f"pattern needs {n} entries")
    try:
        return tuple(None if p in ("*", "") else float(p) for p in parts)
    except ValueError as exc:
        raise BadParameter(f"bad pattern {text!r}") from exc


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "human"), default="json")
    common.add_argument("--lp-tol", type=float, default=pp.LP_TOL)
    common.add_argument("--sdp-gap", type=float, default=dm.INTERNAL_GAP)
    common.add_argument("--psd-tol", type=float, default=1e-9)
    common.add_argument("--certificate", action="store_true",
                        help="include H_opt and the dual measurement")

    rho_opt = argparse.ArgumentParser(add_help=False)
    rho_opt.add_argument("--rho", default="maximally-mixed",
                         help="maximally-mixed, bloch:x,y,z, or a JSON file")

    p = argparse.ArgumentParser(prog="povm-order", description="Post-processing order and incompatibility of POVMs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common])
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("simplify", parents=[common])
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simplify)

    s = sub.add_parser("order", parents=[common])
    s.add_argument("file_a")
    s.add_argument("file_b")
    s.set_defaults(func=cmd_order)

    s = sub.add_parser("fisher", parents=[common, rho_opt])
    s.add_argument("file")
    s.add_argument("--truncated", action="store_true")
    s.set_defaults(func=cmd_fisher)

    s = sub.add_parser("height", parents=[common, rho_opt])
    s.add_argument("files", nargs="+")
    s.set_defaults(func=cmd_height)

    s = sub.add_parser("incompat", parents=[common, rho_opt])
    s.add_argument("files", nargs="+")
    s.add_argument("--pgm", action="store_true")
    s.set_defaults(func=cmd_incompat)

    s = sub.add_parser("outcome-bound", parents=[common, rho_opt])
    s.add_argument("files", nargs="+")
    s.set_defaults(func=cmd_outcome_bound)

    s = sub.add_parser("joint", parents=[common])
    s.add_argument("file_a")
    s.add_argument("file_b")
    s.set_defaults(func=cmd_joint)

    s = sub.add_parser("ft", parents=[common])
    s.add_argument("--etas", required=True)
    s.add_argument("--axes", default="trine")
    s.set_defaults(func=cmd_ft)

    s = sub.add_parser("scan", parents=[common])
    s.add_argument("family", choices=("fourier", "qubit-pair", "qubit-triple", "planar"))
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--M", type=int, default=2)
    s.add_argument("--grid", type=int)
    s.add_argument("--lo", type=float, default=0.0)
    s.add_argument("--hi", type=float, default=1.0)
    s.add_argument("--axes")
    s.add_argument("--bloch", default="0,0,0", help="x,y,z or 'mixed' for (1/2,1/3,1/3)")
    s.add_argument("--pattern", help="fixed sharpness values, '*' for scanned slots")
    s.add_argument("--oracle", action="store_true")
    s.set_defaults(func=cmd_scan)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = CliConfig(args.lp_tol, args.sdp_gap, args.psd_tol, args.format,
                        getattr(args, "rho", "maximally-mixed"), args.certificate)
        result = args.func(args, cfg)
    except (ValidationError, ZeroDenominator) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except PovmOrderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if isinstance(result, sc.ScanResult):
        if cfg.fmt == "csv":
            sys.stdout.write(result.to_csv())
        else:
            emit(result.to_json(), cfg)
    else:
        emit(result, cfg)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
