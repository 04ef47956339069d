import math

import numpy as np
import pytest

from povm_order import scenarios as sc
from povm_order.errors import BadBloch

XYZ = [(1.0, 0, 0), (0, 1.0, 0), (0, 0, 1.0)]


def test_bloch_clamp():
    rho = sc.bloch_rho([0, 0, 1])
    assert np.linalg.eigvalsh(rho)[0] > 0
    assert np.isclose(np.linalg.eigvalsh(rho)[0], 0.5e-6)
    with pytest.raises(BadBloch):
        sc.bloch_rho([1, 1, 0])
    with pytest.raises(BadBloch):
        sc.bloch_rho([1, 0])


def test_fourier_small_grid_and_examples():
    res = sc.scan_fourier(2, 11)
    rec = {(r["s"], r["t"]): r for r in res.records}
    assert rec[(0.9, 0.9)]["zhu_verdict"] == "incompatible"
    assert rec[(0.9, 0.9)]["analytic_flag"] == "incompatible"
    for d in (2, 3, 10):
        assert sc.fourier_analytic_compatible(d, 0.5, 0.4)
    r = sc.scan_fourier(3, 6)
    assert len(r.records) == 36


def test_csv_format_is_stable():
    res = sc.scan_planar(2, [0.5, 0.72])
    text = res.to_csv()
    lines = text.split("\n")
    assert lines[0] == "lam,height,zhu_verdict,analytic_flag,oracle_verdict"
    assert "\r" not in text and text.endswith("\n")
    assert lines[2].startswith("0.72,") and lines[2].endswith(",incompatible,incompatible,")
    assert res.to_csv() == sc.scan_planar(2, [0.5, 0.72]).to_csv()


def test_threads_preserve_order(monkeypatch):
    base = sc.scan_planar(3, [0.2, 0.5, 0.8, 0.9]).to_csv()
    monkeypatch.setenv("POVM_ORDER_THREADS", "3")
    assert sc.scan_planar(3, [0.2, 0.5, 0.8, 0.9]).to_csv() == base


def test_planar_examples():
    res = sc.scan_planar(2, [0.5, 0.72])
    assert [r["zhu_verdict"] for r in res.records] == ["inconclusive", "incompatible"]
    assert [r["analytic_flag"] for r in res.records] == ["compatible", "incompatible"]
    r4 = sc.scan_planar(4, [0.7]).records[0]
    assert r4["zhu_verdict"] == "inconclusive" and r4["analytic_flag"] == "incompatible"
    assert math.isclose(sc.planar_optimal_threshold(2), 1 / math.sqrt(2))


def test_planar_zhu_boundary_independent_of_m():
    for M in (2, 3, 5):
        assert abs(sc.planar_zhu_boundary(M, 1e-4) - 1 / math.sqrt(2)) < 2e-4
    assert sc.planar_optimal_threshold(3) < 1 / math.sqrt(2) - 1e-3


def test_qubit_pair_xy_threshold():
    grid = list(np.linspace(0, 1, 41))
    res = sc.scan_qubit_pair(XYZ[:2], [0, 0, 0], grid, pattern=(None, None))
    first = next(r["eta1"] for r in res.records if r["zhu_verdict"] == "incompatible")
    assert abs(first - 1 / math.sqrt(2)) <= grid[1] - grid[0]


def test_qubit_pair_oracle_soundness():
    res = sc.scan_qubit_pair([XYZ[0], XYZ[2]], [0, 0, 0.3], list(np.linspace(0.2, 1, 5)), oracle=True)
    for r in res.records:
        if r["zhu_verdict"] == "incompatible":
            assert r["oracle_verdict"] == "incompatible"


def test_qubit_triple_xyz_boundary():
    grid = list(np.linspace(0, 1, 101))
    res = sc.scan_qubit_triple(XYZ, [0, 0, 0], grid, pattern=(None, 0.5, 0.5))
    first = next(r["eta1"] for r in res.records if r["height"] > 2 + 1e-6)
    assert abs(first - math.sqrt(0.5)) <= 0.01
    ft_first = next(r["eta1"] for r in res.records if r["analytic_flag"] == "incompatible")
    assert abs(ft_first - math.sqrt(0.5)) <= 0.01


def test_bloch_path_and_mixed_vector():
    path = [[0, 0, 0], [0.5, 1 / 3, 1 / 3]]
    res = sc.scan_qubit_triple(XYZ, path, [0.5, 0.8])
    assert len(res.records) == 4
    assert res.records[2]["v1"] == 0.5
