import json

import numpy as np
import pytest

from povm_order import povm as pv
from povm_order.errors import DuplicateLabel, EffectNotPSD, NotAState, SumNotIdentity


def test_validate_errors_name_the_effect():
    with pytest.raises(EffectNotPSD) as err:
        pv.validate([np.diag([1.5, 0]), np.diag([-0.5, 1])])
    assert err.value.index == 1
    with pytest.raises(SumNotIdentity):
        pv.validate([np.eye(2) / 2])
    with pytest.raises(DuplicateLabel):
        pv.validate([np.eye(2) / 2, np.eye(2) / 2], labels=[3, 3])


def test_json_round_trip():
    P = pv.random_povm(3, 4, seed=5)
    Q = pv.Povm.from_json(json.loads(json.dumps(P.to_json())))
    assert Q.labels == P.labels
    assert np.allclose(Q.stacked(), P.stacked())


def test_simplify_merges_collinear_and_drops_zero():
    E = np.diag([1.0, 0.0])
    P = pv.validate([E / 3, 2 * E / 3, np.zeros((2, 2)), np.diag([0.0, 1.0])], labels=[5, 2, 7, 9])
    S = pv.simplify(P)
    assert S.simple and len(S) == 2
    assert S.labels == (2, 9)
    assert np.allclose(S.effects[0], E)
    assert pv.length(P) == 2


def test_trivial_and_noise_free_lengths():
    assert pv.length(pv.trivial(3, [0.2, 0.3, 0.5])) == 1
    assert pv.length(pv.make_von_neumann(np.eye(4))) == 4
    assert pv.length(pv.make_qubit_dichotomic(0.0, [1, 0, 0])) == 1


def test_fourier_pair_is_mub():
    A, B = pv.make_fourier_pair(3, 1.0, 1.0)
    for Ea in A.effects:
        for Eb in B.effects:
            assert np.isclose(np.trace(Ea @ Eb).real, 1 / 3)


def test_anticommuting_generators():
    for g in range(2, 8):
        T = pv.anticommuting_generators(g)
        d = T[0].shape[0]
        assert d == 2 ** max(1, int(np.ceil((g - 1) / 2)))
        for i in range(g):
            assert np.allclose(T[i] @ T[i], np.eye(d))
            for j in range(i):
                assert np.allclose(T[i] @ T[j] + T[j] @ T[i], 0)


def test_noisy_mixture_and_tensor():
    rho = pv.random_state(2, 1)
    P = pv.make_qubit_dichotomic(1.0, [0, 1, 0])
    N = pv.noisy_mixture(P, 0.0, rho)
    assert pv.length(N) == 1
    T = pv.tensor_povm(P, P)
    assert T.dim == 4 and len(set(T.labels)) == 4
    with pytest.raises(NotAState):
        pv.noisy_mixture(P, 0.5, np.eye(2))


def test_pair_labels_injective():
    seen = {pv.pair_labels(x, y) for x in range(-5, 6) for y in range(-5, 6)}
    assert len(seen) == 121


def test_random_povm_deterministic():
    a, b = pv.random_povm(3, 5, 11), pv.random_povm(3, 5, 11)
    assert np.array_equal(a.stacked(), b.stacked())
    assert np.allclose(a.stacked().sum(axis=0), np.eye(3), atol=1e-12)


def test_constructors_valid():
    for P in [pv.make_sic_qubit(), pv.make_mub_complete_qubit(), *pv.make_trine(0.8), *pv.make_planar(5, 0.4)]:
        assert np.allclose(P.stacked().sum(axis=0), np.eye(P.dim))
